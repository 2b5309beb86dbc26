#include "interlace/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "interlace/errors.hpp"
#include "interlace/parallel.hpp"
#include "interlace/walk.hpp"

namespace interlace {

void UnionFind::reset(std::size_t n) {
  parent_.resize(n);
  std::iota(parent_.begin(), parent_.end(), 0u);
  size_.assign(n, 1);
}

std::uint32_t UnionFind::find(std::uint32_t a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

bool UnionFind::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

std::vector<std::size_t> ClusterDecomposition::cluster_sizes() const {
  std::vector<std::size_t> count(root.size(), 0);
  for (auto r : root) {
    if (r != kNoCluster) ++count[r];
  }
  std::vector<std::size_t> out;
  for (auto c : count) {
    if (c) out.push_back(c);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

ClusterDecomposition clusters(const Ball& window, const std::vector<std::uint8_t>& occupied) {
  const std::size_t n = window.size();
  if (occupied.size() != n) throw ArgumentError("occupancy flags must match the window size");
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!occupied[i]) continue;
    for (auto j : window.adjacency[i]) {
      if (j > i && occupied[j]) uf.unite(static_cast<std::uint32_t>(i), j);
    }
  }
  ClusterDecomposition out;
  out.root.assign(n, kNoCluster);
  for (std::size_t i = 0; i < n; ++i) {
    if (!occupied[i]) continue;
    out.root[i] = uf.find(static_cast<std::uint32_t>(i));
    if (out.root[i] == i) ++out.cluster_count;
  }
  return out;
}

ClusterDecomposition clusters(const Ball& window, std::span<const Vertex> occupied) {
  std::vector<std::uint8_t> flags(window.size(), 0);
  for (const auto& v : occupied) {
    auto i = window.index_of(v);
    if (!i) throw ArgumentError("occupied vertex outside the window");
    flags[*i] = 1;
  }
  return clusters(window, flags);
}

namespace {

int resolve_kill(const Graph& g, const Ball& window, int kill_radius) {
  return kill_radius >= 0 ? kill_radius : default_kill_radius(g, window).radius;
}

FrequencyEstimate finish(const Frequency& f) {
  return {f, f.estimate(), f.ci_radius(3.0)};
}

bool vacant_reach(const Ball& window, const std::vector<std::uint8_t>& in_trace) {
  std::vector<std::uint8_t> vacant(in_trace.size());
  for (std::size_t i = 0; i < vacant.size(); ++i) vacant[i] = in_trace[i] ? 0 : 1;
  if (!vacant[0]) return false;
  const ClusterDecomposition c = clusters(window, vacant);
  for (std::size_t i = 0; i < vacant.size(); ++i) {
    if (window.depth[i] == window.radius && c.connected(0, i)) return true;
  }
  return false;
}

bool linked(const Ball& window, const std::vector<std::uint8_t>& in_trace, std::size_t a, std::size_t b) {
  if (!in_trace[a] || !in_trace[b]) return false;
  return a == b || clusters(window, in_trace).connected(a, b);
}

}  // namespace

FrequencyEstimate two_point(const Graph& g, double u, const Vertex& x, const Vertex& y, const Ball& window,
                            std::size_t n_samples, std::uint64_t seed, int workers, int kill_radius) {
  const auto a = window.index_of(x), b = window.index_of(y);
  if (!a || !b) throw ArgumentError("two-point vertices must lie in the window");
  const SoupSampler sampler = SoupSampler::full_window(g, window, resolve_kill(g, window, kill_radius));
  auto f = run_samples<Frequency>(n_samples, seed, workers, [&](std::size_t, Rng& rng, Frequency& acc) {
    acc.add(linked(window, sampler.sample(u, rng).in_trace, *a, *b));
  });
  return finish(f);
}

FrequencyEstimate eta_proxy(const Graph& g, double u, int radius, std::size_t n_samples, std::uint64_t seed,
                            int workers, int kill_radius) {
  if (radius < 1) throw ArgumentError("eta proxy needs window radius >= 1");
  const Ball window = g.ball(g.origin(), radius);
  const SoupSampler sampler = SoupSampler::full_window(g, window, resolve_kill(g, window, kill_radius));
  auto f = run_samples<Frequency>(n_samples, seed, workers, [&](std::size_t, Rng& rng, Frequency& acc) {
    acc.add(vacant_reach(window, sampler.sample(u, rng).in_trace));
  });
  return finish(f);
}

std::string observable_name(Observable o) {
  switch (o) {
    case Observable::EtaProxy:
      return "eta_proxy";
    case Observable::TwoPoint:
      return "two_point";
    case Observable::TraceClusterCount:
      return "trace_cluster_count";
  }
  return "unknown";
}

Observable parse_observable(std::string_view name) {
  if (name == "eta_proxy") return Observable::EtaProxy;
  if (name == "two_point") return Observable::TwoPoint;
  if (name == "trace_cluster_count") return Observable::TraceClusterCount;
  throw ArgumentError("unknown observable '" + std::string(name) + "'");
}

SweepReport sweep(const Graph& g, std::span<const double> u_grid, const Ball& window, std::size_t n_samples,
                  std::uint64_t seed, int workers, SweepOptions options) {
  if (u_grid.empty()) throw ArgumentError("sweep grid is empty");
  SweepReport report;
  report.graph = g.spec();
  report.observable = options.observable;
  report.observable_name = observable_name(options.observable);
  report.center = window.center;
  report.window_radius = window.radius;
  report.kill_radius = resolve_kill(g, window, options.kill_radius);
  report.seed = seed;
  report.grid.assign(u_grid.begin(), u_grid.end());

  std::size_t a = 0, b = 0;
  if (options.observable == Observable::TwoPoint) {
    const Vertex x = options.x.value_or(window.center);
    const Vertex y = options.y.value_or(window.center);
    auto ia = window.index_of(x), ib = window.index_of(y);
    if (!ia || !ib) throw ArgumentError("two-point vertices must lie in the window");
    a = *ia;
    b = *ib;
  }
  if (options.observable == Observable::EtaProxy && window.radius < 1) {
    throw ArgumentError("eta proxy needs window radius >= 1");
  }
  const SoupSampler sampler = SoupSampler::full_window(g, window, report.kill_radius);
  const std::size_t levels = u_grid.size();

  struct Acc {
    std::vector<Frequency> freq;
    std::vector<MeanStat> mean;
    std::uint64_t violations = 0;
    void merge(const Acc& o) {
      for (std::size_t i = 0; i < freq.size(); ++i) {
        freq[i].merge(o.freq[i]);
        mean[i].merge(o.mean[i]);
      }
      violations += o.violations;
    }
  };
  Acc prototype;
  prototype.freq.resize(levels);
  prototype.mean.resize(levels);

  Acc acc = run_samples<Acc>(
      n_samples, seed, workers,
      [&](std::size_t, Rng& rng, Acc& out) {
        const auto samples = sampler.layered(u_grid, rng);
        int previous = -1;
        for (std::size_t l = 0; l < levels; ++l) {
          const auto& trace = samples[l].in_trace;
          if (l > 0) {
            const auto& before = samples[l - 1].in_trace;
            for (std::size_t i = 0; i < trace.size(); ++i) {
              if (before[i] && !trace[i]) ++out.violations;
            }
          }
          int value = 0;
          switch (options.observable) {
            case Observable::EtaProxy:
              value = vacant_reach(window, trace) ? 1 : 0;
              out.freq[l].add(value != 0);
              // Vacant sets shrink with u, so the indicator cannot come back.
              if (previous == 0 && value == 1) ++out.violations;
              break;
            case Observable::TwoPoint:
              value = linked(window, trace, a, b) ? 1 : 0;
              out.freq[l].add(value != 0);
              if (previous == 1 && value == 0) ++out.violations;
              break;
            case Observable::TraceClusterCount:
              out.mean[l].add(static_cast<double>(clusters(window, trace).cluster_count));
              break;
          }
          previous = value;
        }
      },
      prototype);

  for (std::size_t l = 0; l < levels; ++l) {
    SweepRow row;
    row.u = u_grid[l];
    if (options.observable == Observable::TraceClusterCount) {
      row.n = acc.mean[l].count;
      row.estimate = acc.mean[l].mean;
      row.ci = acc.mean[l].ci_radius(3.0);
    } else {
      row.n = acc.freq[l].trials;
      row.estimate = acc.freq[l].estimate();
      row.ci = acc.freq[l].ci_radius(3.0);
    }
    report.rows.push_back(row);
  }
  report.monotonicity_violations = acc.violations;
  return report;
}

BoundsReport bounds_report(const Graph& g) {
  if (!g.transient()) throw DomainError("bounds need a transient graph, got " + g.spec());
  BoundsReport r;
  r.graph = g.spec();
  r.max_degree = g.degree();
  r.rho = spectral_radius_closed_form(g);
  r.amenable = g.amenable();
  const Vertex o[] = {g.origin()};
  r.escape_origin = solve_escape(g, o).escape(o[0]);

  if (r.rho >= 1) {
    r.u_c_lower = 0.0;
    r.notes.push_back("amenable: bound vacuous");
  } else {
    r.u_c_lower = (1.0 / (2.0 * r.max_degree * r.max_degree)) * (1.0 / r.rho - 1.0);
  }
  const double d = g.degree();
  switch (g.kind()) {
    case GraphKind::RegularTree: {
      const double kappa = g.tree_degree() - 2;
      r.kappa_v = kappa;
      r.kappa_e = kappa;
      r.u_star_lower = -(1.0 / (d * r.escape_origin)) * std::log(d / (d + kappa));
      r.u_star_upper = 2.0 * d * d / (kappa * kappa);
      break;
    }
    case GraphKind::Lattice:
      r.kappa_v = 0.0;
      r.kappa_e = 0.0;
      r.u_star_lower = 0.0;
      r.notes.push_back("u_star upper bound unavailable: isoperimetric constant is zero");
      break;
    case GraphKind::Product:
      r.notes.push_back("isoperimetric constants not available in closed form; u_star bounds omitted");
      break;
  }
  return r;
}

}  // namespace interlace

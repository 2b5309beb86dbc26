// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "interlace/brw.hpp"
#include "interlace/coupling.hpp"
#include "interlace/frog.hpp"
#include "interlace/parallel.hpp"
#include "interlace/percolation.hpp"
#include "interlace/potential.hpp"
#include "interlace/soup.hpp"
#include "interlace/walk.hpp"

using namespace interlace;

namespace {

// Pinned tolerances and sample sizes.
constexpr double kSigma = 3.0;
constexpr double kLooseSigma = 4.0;
constexpr double kZ99 = 2.5758;               // two-sided 99% normal quantile
constexpr double kTreeCapTol = 1e-9;
constexpr double kLatticeCapTol = 2e-3;
constexpr double kWatsonEscape = 0.659462670;  // P_0[never return] on Z^3
constexpr double kSpectralRelTol = 0.02;
constexpr double kRateSlack = 0.05;
constexpr double kBoundsRelTol = 5e-6;         // 5 significant digits
constexpr std::size_t kEmptinessSamples = 100000;
constexpr std::size_t kBrwTrees = 100000;
constexpr std::size_t kHitSamples = 20'000'000;
constexpr std::size_t kChainRuns = 10000;
constexpr std::size_t kLayeredSamples = 10000;
constexpr std::size_t kDecorrelationSamples = 1'000'000;
constexpr std::size_t kInvarianceSamples = 100000;
// Amenable smoke check: fraction recorded on the first run (seed 404, 2000 samples
// gave 0.9935); the pinned baseline leaves room for sampling noise.
constexpr double kAmenableBaseline = 0.98;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string cat(const T&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome emptiness_law() {
  const Graph g = Graph::parse("tree:3");
  const Vertex o = g.origin();
  const std::vector<std::vector<Vertex>> sets{{o}, g.parse_vertex_list("o;1"), g.parse_vertex_list("0;o;1")};
  const std::vector<const char*> names{"root", "pair", "path3"};
  const std::vector<double> levels{0.5, 1.0};
  int within3 = 0, within4 = 0, cells = 0;
  std::ostringstream detail;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const Ball window = g.ball(o, 1);
    const Equilibrium eq = equilibrium(g, sets[s], kTreeCapTol);
    const SoupSampler sampler(g, window, eq, default_kill_radius(g, window).radius);
    std::vector<std::uint32_t> idx;
    for (const auto& v : sets[s]) idx.push_back(*window.index_of(v));
    for (double u : levels) {
      const Frequency f = run_samples<Frequency>(kEmptinessSamples, 1000 + s * 10 + static_cast<int>(u * 2), 1,
                                                 [&](std::size_t, Rng& rng, Frequency& acc) {
                                                   const SoupSample x = sampler.sample(u, rng);
                                                   bool hit = false;
                                                   for (auto i : idx) hit = hit || x.contains(i);
                                                   acc.add(!hit);
                                                 });
      const double p = std::exp(-u * eq.cap);
      const double z = (f.estimate() - p) / f.sigma_at(p);
      within3 += std::abs(z) < kSigma;
      within4 += std::abs(z) < kLooseSigma;
      ++cells;
      detail << " " << names[s] << "@" << u << ":z=" << fmt("%+.2f", z);
    }
  }
  return {within4 == cells && within3 >= cells - 1, cat(within3, "/", cells, " within 3 sigma;", detail.str())};
}

Outcome capacity_oracles() {
  const Graph t = Graph::parse("tree:3");
  const Vertex o = t.origin();
  const double root = capacity(t, std::span(&o, 1), kTreeCapTol);
  const double pair = capacity(t, t.parse_vertex_list("o;1"), kTreeCapTol);
  const Graph z = Graph::parse("z:3");
  const Vertex zo = z.origin();
  const double lattice = capacity(z, std::span(&zo, 1));
  const double reference = 6 * kWatsonEscape;
  // plain radius-60 solve with boundary value 1, reported alongside
  const double raw60 = 6 * solve_escape_at_radius(z, std::span(&zo, 1), 60, SolverBackend::Explicit).escape(zo);
  const bool pass = std::abs(root - 1.5) <= kTreeCapTol && std::abs(pair - 2.0) <= kTreeCapTol &&
                    std::abs(lattice - reference) <= kLatticeCapTol;
  return {pass, cat("tree root ", fmt("%.12f", root), ", pair ", fmt("%.12f", pair), ", z:3 point ",
                    fmt("%.5f", lattice), " vs 6*escape ", fmt("%.5f", reference), " (uncorrected radius-60 solve ",
                    fmt("%.5f", raw60), ")")};
}

Outcome spectral() {
  const Graph t = Graph::parse("tree:3");
  const auto te = spectral_radius(t, 200, SpectralMode::PowerEstimate);
  const double tc = spectral_radius_closed_form(t);
  const Graph p = Graph::parse("treez:3x1");
  const auto pe = spectral_radius(p, 200, SpectralMode::PowerEstimate);
  const double pc = spectral_radius_closed_form(p);
  const double dt = std::abs(te.value / tc - 1), dp = std::abs(pc / pe.value - 1);
  return {dt <= kSpectralRelTol && dp <= kSpectralRelTol,
          cat("tree:3 power ", fmt("%.5f", te.value), " vs ", fmt("%.5f", tc), " (", fmt("%.2f", 100 * dt),
              "%), treez:3x1 closed ", fmt("%.5f", pc), " vs power ", fmt("%.5f", pe.value), " (",
              fmt("%.2f", 100 * dp), "%)")};
}

Outcome brw_recursion() {
  const Graph g = Graph::parse("tree:3");
  const double u = 0.1;
  const int n_max = 6;
  struct Acc {
    std::vector<MeanStat> sizes = std::vector<MeanStat>(7);
    std::uint64_t bad = 0;
    void merge(const Acc& o) {
      for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i].merge(o.sizes[i]);
      bad += o.bad;
    }
  };
  const Acc acc = run_samples<Acc>(kBrwTrees, 4000, 1, [&](std::size_t, Rng& rng, Acc& a) {
    const BrwRun run = sample_brw(g, g.origin(), u, n_max, 10'000'000, rng);
    a.bad += check_structure(g, run) ? 0 : 1;
    for (int n = 0; n <= n_max; ++n) a.sizes[static_cast<std::size_t>(n)].add(static_cast<double>(run.generation_size(n)));
  });
  const auto exact = expected_generation_sizes(u, 3, 20);
  bool ok = acc.bad == 0;
  std::ostringstream detail;
  for (int n = 0; n <= n_max; ++n) {
    const auto& m = acc.sizes[static_cast<std::size_t>(n)];
    const double z = (m.mean - exact.exact[static_cast<std::size_t>(n)]) / m.sem();
    ok = ok && std::abs(z) < kSigma;
    detail << " n" << n << ":" << fmt("%.4g", m.mean) << "/" << fmt("%.4g", exact.exact[static_cast<std::size_t>(n)]);
  }
  int envelope_breaks = 0;
  for (int n = 0; n <= 20; ++n) {
    envelope_breaks += exact.exact[static_cast<std::size_t>(n)] >
                       exact.envelope_constant * std::pow(1 + 2 * branching_mean(u, 3), n) * (1 + 1e-12);
  }
  ok = ok && envelope_breaks == 0;
  return {ok, cat("empirical/exact", detail.str(), "; structure violations ", acc.bad, "; envelope breaks (n<=20) ",
                  envelope_breaks, " with c=", fmt("%.4g", exact.envelope_constant))};
}

Outcome heat_kernel() {
  const Graph g = Graph::parse("tree:3");
  const double u = 0.001;
  const Vertex o = g.origin();
  std::vector<int> distances{2, 4, 6};
  std::vector<HitEstimate> hits;
  for (int k : distances) {
    Vertex y = o;
    for (int i = 0; i < k; ++i) g.step(y, 1);
    hits.push_back(hit_probability(g, o, y, u, 60, kHitSamples, 5000 + static_cast<std::uint64_t>(k)));
  }
  bool separated = true;
  for (std::size_t i = 1; i < hits.size(); ++i) {
    const double gap = hits[i - 1].estimate - hits[i].estimate;
    separated = separated && gap > kSigma * std::hypot(hits[i - 1].hits.sigma(), hits[i].hits.sigma());
  }
  // least-squares slope of log p against distance
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  bool positive = true;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    positive = positive && hits[i].estimate > 0;
    const double x = distances[i], y = std::log(std::max(hits[i].estimate, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(hits.size());
  const double rate = std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
  const double bound = spectral_radius_closed_form(g) * (1 + 2 * branching_mean(u, 3));
  std::ostringstream detail;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    detail << "d" << distances[i] << ":" << fmt("%.3e", hits[i].estimate) << "+-" << fmt("%.1e", hits[i].ci) << " ";
  }
  detail << "fitted rate " << fmt("%.4f", rate) << " <= " << fmt("%.4f", bound + kRateSlack);
  return {separated && positive && rate <= bound + kRateSlack, detail.str()};
}

Outcome coupling_chain() {
  const Graph g = Graph::parse("tree:3");
  const Ball window = g.ball(g.origin(), 3);
  const int kill = default_kill_radius(g, window).radius;
  bool ok = true;
  std::ostringstream detail;
  for (double u : {0.2, 0.5}) {
    const ChainReport r = chain_report(g, u, g.origin(), window, kill, 60, kChainRuns, 6000 + static_cast<int>(u * 10));
    // standalone samplers at the same probes
    const auto soup = SoupSampler::full_window(g, window, kill, 0, true);
    FrogConfig cfg;
    cfg.u = u;
    cfg.origin = g.origin();
    cfg.window = window;
    cfg.kill_radius = kill;
    struct Acc {
      std::vector<Frequency> cluster, frog;
      void merge(const Acc& o) {
        for (std::size_t i = 0; i < cluster.size(); ++i) {
          cluster[i].merge(o.cluster[i]);
          frog[i].merge(o.frog[i]);
        }
      }
    };
    Acc proto;
    proto.cluster.resize(r.probes.size());
    proto.frog.resize(r.probes.size());
    const Acc plain = run_samples<Acc>(
        kChainRuns, 6100 + static_cast<int>(u * 10), 1,
        [&](std::size_t, Rng& rng, Acc& a) {
          const auto cluster = revealed_cluster(window, soup.sample(u, rng));
          const FrogRun frog = run_frog(g, cfg, rng);
          for (std::size_t i = 0; i < r.probes.size(); ++i) {
            a.cluster[i].add(std::binary_search(cluster.begin(), cluster.end(), r.probes[i]));
            a.frog[i].add(std::binary_search(frog.trace.begin(), frog.trace.end(), r.probes[i]));
          }
        },
        proto);
    double worst = 0;
    for (std::size_t i = 0; i < r.probes.size(); ++i) {
      worst = std::max(worst, std::abs(two_sample_z(r.cluster_hits[i], plain.cluster[i])));
      worst = std::max(worst, std::abs(two_sample_z(r.frog_hits[i], plain.frog[i])));
    }
    ok = ok && r.violations == 0 && r.order_violations == 0 && worst < kSigma;
    detail << "u=" << u << ": violations " << r.violations << ", size order breaks " << r.order_violations
           << ", mean sizes " << fmt("%.3f", r.cluster.mean.mean) << "/" << fmt("%.3f", r.frog.mean.mean) << "/"
           << fmt("%.3f", r.brw.mean.mean) << ", worst probe |z| " << fmt("%.2f", worst) << "; ";
  }
  return {ok, detail.str()};
}

Outcome monotone_levels() {
  const Graph g = Graph::parse("tree:3");
  const Ball window = g.ball(g.origin(), 3);
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
  const SweepReport eta = sweep(g, grid, window, kLayeredSamples, 7000);
  SweepOptions count;
  count.observable = Observable::TraceClusterCount;
  const SweepReport clusters_sweep = sweep(g, grid, window, kLayeredSamples, 7001, 1, count);
  // direct per-sample check of trace growth and vacant shrinkage
  const auto sampler = SoupSampler::full_window(g, window, default_kill_radius(g, window).radius);
  const std::uint64_t breaks = run_samples<MeanStat>(kLayeredSamples, 7002, 1, [&](std::size_t, Rng& rng, MeanStat& m) {
                                 const auto layers = sampler.layered(grid, rng);
                                 std::uint64_t b = 0;
                                 for (std::size_t l = 1; l < layers.size(); ++l) {
                                   for (std::size_t i = 0; i < window.size(); ++i) {
                                     b += layers[l - 1].contains(i) && !layers[l].contains(i);
                                   }
                                 }
                                 m.add(static_cast<double>(b));
                               }).mean > 0
                                   ? 1
                                   : 0;
  const bool ok = eta.monotonicity_violations == 0 && clusters_sweep.monotonicity_violations == 0 && breaks == 0;
  std::ostringstream detail;
  detail << "violations: eta sweep " << eta.monotonicity_violations << ", trace sweep "
         << clusters_sweep.monotonicity_violations << ", direct containment " << breaks << "; eta";
  for (const auto& row : eta.rows) detail << " " << row.u << ":" << fmt("%.3f", row.estimate);
  return {ok, detail.str()};
}

Outcome tree_disconnection() {
  const Graph g = Graph::parse("tree:3");
  const Ball small = g.ball(g.origin(), 1);
  const auto sampler = SoupSampler::full_window(g, small, default_kill_radius(g, small).radius);
  const Frequency isolated = run_samples<Frequency>(100000, 8000, 1, [&](std::size_t, Rng& rng, Frequency& f) {
    const SoupSample s = sampler.sample(1.0, rng);
    f.add(!s.contains(0) && s.contains(1) && s.contains(2) && s.contains(3));
  });
  const Ball window = g.ball(g.origin(), 4);
  SweepOptions count;
  count.observable = Observable::TraceClusterCount;
  const std::vector<double> grid{1.0};
  const SweepReport r = sweep(g, grid, window, 20000, 8001, 1, count);
  const double lower_isolated = isolated.estimate() - kZ99 * isolated.sigma();
  const double lower_count = r.rows[0].estimate - kZ99 / kSigma * r.rows[0].ci;
  return {lower_isolated > 0 && lower_count > 1,
          cat("P[center vacant, neighbors occupied] ", fmt("%.4f", isolated.estimate()), " (99% lower ",
              fmt("%.4f", lower_isolated), "); mean trace clusters in r=4 window ", fmt("%.3f", r.rows[0].estimate),
              " (99% lower ", fmt("%.3f", lower_count), ")")};
}

Outcome bounds_arithmetic() {
  const BoundsReport t = bounds_report(Graph::parse("tree:3"));
  const double rho = 2 * std::sqrt(2.0) / 3;
  const double uc = (1.0 / 18) * (1 / rho - 1);
  const double lo = -(2.0 / 3) * std::log(0.75);
  auto close = [](double a, double b) { return std::abs(a / b - 1) <= kBoundsRelTol; };
  const BoundsReport z = bounds_report(Graph::parse("z:3"));
  const bool amenable_flag = z.amenable && z.u_c_lower == 0.0 &&
                             std::find(z.notes.begin(), z.notes.end(), "amenable: bound vacuous") != z.notes.end();
  const bool ok = close(t.u_c_lower, uc) && t.u_star_lower && close(*t.u_star_lower, lo) && t.u_star_upper &&
                  close(*t.u_star_upper, 18.0) && amenable_flag;
  return {ok, cat("tree:3 u_c_lower ", fmt("%.6f", t.u_c_lower), ", u_star in [",
                  fmt("%.5f", t.u_star_lower.value_or(NAN)), ", ", fmt("%.5g", t.u_star_upper.value_or(NAN)),
                  "]; z:3 amenable=", z.amenable ? "true" : "false", " u_c_lower=", z.u_c_lower)};
}

Outcome decorrelation() {
  const Graph g = Graph::parse("tree:3");
  const Vertex o = g.origin();
  const double u = 1.0;
  const double cap1 = capacity(g, std::span(&o, 1), kTreeCapTol);
  std::vector<double> c, sc;
  std::ostringstream detail;
  for (int m : {2, 4, 6}) {
    Vertex y = o;
    for (int i = 0; i < m; ++i) g.step(y, 1);
    const Ball window = g.ball(o, m);
    const std::vector<Vertex> k{o, y};
    const SoupSampler sampler(g, window, equilibrium(g, k, kTreeCapTol), default_kill_radius(g, window, 1e-6).radius);
    const std::uint32_t iy = *window.index_of(y);
    struct Acc {
      Frequency a, b, ab;
      void merge(const Acc& o) {
        a.merge(o.a);
        b.merge(o.b);
        ab.merge(o.ab);
      }
    };
    const Acc acc = run_samples<Acc>(kDecorrelationSamples, 9000 + static_cast<std::uint64_t>(m), 1,
                                     [&](std::size_t, Rng& rng, Acc& out) {
                                       const SoupSample s = sampler.sample(u, rng);
                                       const bool ha = s.contains(0), hb = s.contains(iy);
                                       out.a.add(ha);
                                       out.b.add(hb);
                                       out.ab.add(ha && hb);
                                     });
    const double cov = acc.ab.estimate() - acc.a.estimate() * acc.b.estimate();
    // delta-method standard error of the covariance of two indicators
    const double pa = acc.a.estimate(), pb = acc.b.estimate();
    const double n = static_cast<double>(acc.ab.trials);
    const double se = std::sqrt(std::max(0.0, pa * (1 - pa) * pb * (1 - pb) + cov * (1 - 2 * pa) * (1 - 2 * pb) - cov * cov) / n);
    const double scale = cap1 * cap1 * 2 * std::pow(0.5, m);
    c.push_back(std::abs(cov) / scale);
    sc.push_back(se / scale);
    detail << "m=" << m << ": cov " << fmt("%.3e", cov) << ", c_u " << fmt("%.4f", c.back()) << "+-"
           << fmt("%.4f", sc.back()) << "; ";
  }
  bool bounded = true;
  for (std::size_t i = 1; i < c.size(); ++i) bounded = bounded && c[i] <= c[0] + kSigma * std::hypot(sc[0], sc[i]);
  return {bounded, detail.str()};
}

Outcome invariance() {
  const Graph z = Graph::parse("z:3");
  const Vertex zo = z.origin();
  const auto lattice = invariance_check(z, 1.0, std::span(&zo, 1), z.parse_vertex("5,0,0"), kInvarianceSamples, 10000);
  const Graph t = Graph::parse("tree:3");
  const Vertex to = t.origin();
  const auto tree = invariance_check(t, 1.0, std::span(&to, 1), t.parse_vertex("0"), kInvarianceSamples, 10001);
  const auto pair = t.parse_vertex_list("o;1");
  const auto tree_pair = invariance_check(t, 1.0, pair, t.parse_vertex("210"), kInvarianceSamples, 10002);
  return {std::abs(lattice.z) < kSigma && std::abs(tree.z) < kSigma && std::abs(tree_pair.z) < kSigma,
          cat("z:3 {0} vs {(5,0,0)}: ", fmt("%.4f", lattice.original.estimate()), "/",
              fmt("%.4f", lattice.shifted.estimate()), " z=", fmt("%+.2f", lattice.z), "; tree:3 root vs 0: ",
              fmt("%.4f", tree.original.estimate()), "/", fmt("%.4f", tree.shifted.estimate()), " z=",
              fmt("%+.2f", tree.z), "; tree:3 pair re-rooted: z=", fmt("%+.2f", tree_pair.z))};
}

// Qualitative check on the amenable lattice, reported but not numbered.
Outcome amenable_smoke() {
  const Graph g = Graph::parse("z:3");
  const Ball window = g.ball(g.origin(), 6);
  const auto sampler = SoupSampler::full_window(g, window, default_kill_radius(g, window).radius);
  std::vector<std::uint8_t> inner(window.size(), 0);
  for (std::size_t i = 0; i < window.size(); ++i) inner[i] = window.depth[i] <= 3;
  const Frequency single = run_samples<Frequency>(2000, 404, 1, [&](std::size_t, Rng& rng, Frequency& f) {
    const SoupSample s = sampler.sample(1.0, rng);
    const ClusterDecomposition d = clusters(window, s.in_trace);
    std::uint32_t root = kNoCluster;
    bool one = true;
    for (std::size_t i = 0; i < window.size() && one; ++i) {
      if (!inner[i] || !d.occupied(i)) continue;
      if (root == kNoCluster) root = d.root[i];
      one = d.root[i] == root;
    }
    f.add(one);
  });
  return {single.estimate() > kAmenableBaseline,
          cat("z:3 u=1 r=6: inner trace in one window cluster in ", fmt("%.4f", single.estimate()),
              " of samples (baseline ", kAmenableBaseline, ")")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "emptiness law", emptiness_law},
      {2, "capacity oracles", capacity_oracles},
      {3, "spectral radius", spectral},
      {4, "branching walk generation sizes", brw_recursion},
      {5, "hit probability decay", heat_kernel},
      {6, "coupling chain", coupling_chain},
      {7, "monotone levels", monotone_levels},
      {8, "tree disconnection", tree_disconnection},
      {9, "bounds arithmetic", bounds_arithmetic},
      {10, "decorrelation", decorrelation},
      {11, "invariance", invariance},
      {0, "amenable smoke check", amenable_smoke},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    if (c.id == 0) {
      std::printf("%s smoke: %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    } else {
      std::printf("%s criterion %d: %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

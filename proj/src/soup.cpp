#include "interlace/soup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "interlace/errors.hpp"
#include "interlace/parallel.hpp"

namespace interlace {

std::size_t SoupSample::trace_size() const {
  return static_cast<std::size_t>(std::count(in_trace.begin(), in_trace.end(), std::uint8_t{1}));
}

std::vector<Vertex> SoupSample::trace(const Ball& window) const {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < in_trace.size(); ++i) {
    if (in_trace[i]) out.push_back(window.members[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Vertex> SoupSample::vacant(const Ball& window) const {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < in_trace.size(); ++i) {
    if (!in_trace[i]) out.push_back(window.members[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Points on a few rays leaving the center; ray[k] sits at distance k from it.
std::vector<std::vector<Vertex>> probe_rays(const Graph& g, const Vertex& center, int length) {
  std::vector<std::vector<int>> patterns;
  const int d = g.kind() == GraphKind::Lattice ? 0 : g.tree_degree();
  const int lat = g.lattice_dim();
  if (g.kind() != GraphKind::Lattice) patterns.push_back({1});
  if (lat > 0) {
    patterns.push_back({d});  // first lattice axis
    std::vector<int> diag;
    for (int i = 0; i < lat; ++i) diag.push_back(d + 2 * i);
    if (lat > 1) patterns.push_back(diag);
    if (g.kind() == GraphKind::Product) {
      std::vector<int> mixed = {1};
      mixed.insert(mixed.end(), diag.begin(), diag.end());
      patterns.push_back(mixed);
    }
  }
  std::vector<std::vector<Vertex>> rays;
  for (const auto& pattern : patterns) {
    std::vector<Vertex> ray = {center};
    Vertex v = center;
    for (int k = 1; k <= length; ++k) {
      g.step(v, pattern[static_cast<std::size_t>(k - 1) % pattern.size()]);
      ray.push_back(v);
    }
    rays.push_back(std::move(ray));
  }
  return rays;
}

}  // namespace

KillRadius default_kill_radius(const Graph& g, const Ball& window, double eps) {
  if (!(eps > 0 && eps < 1)) throw ArgumentError("reentry_eps must lie in (0, 1)");
  KillRadius out;
  const int rw = window.radius;
  if (g.kind() == GraphKind::RegularTree) {
    const double ratio = 1.0 / (g.tree_degree() - 1);
    const int extra = static_cast<int>(std::ceil(std::log(1 / eps) / std::log(g.tree_degree() - 1.0) - 1e-12));
    out.radius = rw + std::max(1, extra);
    out.reentry = std::pow(ratio, out.radius - rw);
    return out;
  }
  if (!g.transient()) throw DomainError("no finite kill radius on recurrent graph " + g.spec());

  const int cap = rw + (g.kind() == GraphKind::Product ? 40 : 24);
  const auto rays = probe_rays(g, window.center, cap + 1);
  std::function<double(const Vertex&)> reentry;
  if (g.kind() == GraphKind::Product) {
    EscapeOptions options;
    for (const auto& ray : rays) {
      for (int k = rw + 1; k <= cap + 1; ++k) options.watch.push_back(ray[static_cast<std::size_t>(k)]);
    }
    auto sol = std::make_shared<EscapeSolution>(solve_escape(g, window.members, options));
    reentry = [sol](const Vertex& z) { return 1.0 - sol->avoid(z); };
  } else {
    // The lattice tail decays like 1/R; two fixed radii with the 1/R term removed.
    const int r1 = cap - rw + 10, r2 = cap - rw + 20;
    auto inner = std::make_shared<EscapeSolution>(solve_escape_at_radius(g, window.members, r1));
    auto outer = std::make_shared<EscapeSolution>(solve_escape_at_radius(g, window.members, r2));
    reentry = [=](const Vertex& z) {
      const double a = inner->avoid(z), b = outer->avoid(z);
      return std::clamp(1.0 - ((r2 + 1) * b - (r1 + 1) * a) / (r2 - r1), 0.0, 1.0);
    };
  }
  for (int r = rw; r <= cap; ++r) {
    double worst = 0;
    for (const auto& ray : rays) worst = std::max(worst, reentry(ray[static_cast<std::size_t>(r + 1)]));
    out.radius = r;
    out.reentry = worst;
    if (worst < eps) return out;
  }
  out.capped = true;
  return out;
}

SoupSampler::SoupSampler(const Graph& g, Ball window, Equilibrium eq, int kill_radius, bool keep_paths)
    : g_(g), window_(std::move(window)), eq_(std::move(eq)), kill_radius_(kill_radius), keep_paths_(keep_paths) {
  if (kill_radius_ < window_.radius) throw ArgumentError("kill radius must be at least the window radius");
  for (const auto& x : eq_.base) {
    if (!window_.contains(x)) throw ArgumentError("base vertex " + g_.format(x) + " is outside the window");
  }
  exact_ = eq_.base.size() == window_.size();
  double total = 0;
  for (double w : eq_.weights) cumulative_.push_back(total += w);
}

SoupSampler SoupSampler::full_window(const Graph& g, Ball window, int kill_radius, double tol, bool keep_paths) {
  Equilibrium eq = interlace::equilibrium(g, window.members, tol);
  return SoupSampler(g, std::move(window), std::move(eq), kill_radius, keep_paths);
}

SoupSample SoupSampler::empty(double u) const {
  if (!(u >= 0) || !std::isfinite(u)) throw ArgumentError("intensity u must be finite and nonnegative");
  SoupSample s;
  s.u = u;
  s.in_trace.assign(window_.size(), 0);
  s.truncation_biased = !exact_;
  return s;
}

void SoupSampler::add_trajectories(SoupSample& s, std::uint64_t n, Rng& rng) const {
  const double total = cumulative_.empty() ? 0.0 : cumulative_.back();
  const auto deg = static_cast<std::uint32_t>(g_.degree());
  for (std::uint64_t t = 0; t < n; ++t) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
    if (it == cumulative_.end()) --it;
    Vertex v = eq_.base[static_cast<std::size_t>(it - cumulative_.begin())];
    Path* path = nullptr;
    if (keep_paths_) {
      s.trajectories.push_back(Path{v, {}, ExitReason::LeftRegion});
      path = &s.trajectories.back();
    }
    for (;;) {
      const int dist = g_.distance(window_.center, v);
      if (dist > kill_radius_) break;
      if (dist <= window_.radius) s.in_trace[window_.index.at(v)] = 1;
      g_.step(v, static_cast<int>(rng.below(deg)));
      if (path) path->steps.push_back(v);
    }
  }
  s.trajectory_count += n;
}

SoupSample SoupSampler::sample(double u, Rng& rng) const {
  SoupSample s = empty(u);
  add_trajectories(s, rng.poisson(u * eq_.cap), rng);
  return s;
}

std::vector<SoupSample> SoupSampler::layered(std::span<const double> levels, Rng& rng) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] >= 0) || (i > 0 && !(levels[i] > levels[i - 1]))) {
      throw ArgumentError("layered levels must be nonnegative and strictly ascending");
    }
  }
  std::vector<SoupSample> out;
  double previous = 0;
  for (double level : levels) {
    SoupSample s = out.empty() ? empty(level) : out.back();
    s.u = level;
    add_trajectories(s, rng.poisson((level - previous) * eq_.cap), rng);
    previous = level;
    out.push_back(std::move(s));
  }
  return out;
}

SoupSample sample(const Graph& g, const SoupConfig& cfg, const Equilibrium& eq, Rng& rng) {
  std::vector<Vertex> k = cfg.base;
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  if (k != eq.base) throw ArgumentError("equilibrium was computed for a different base set");
  if (!(cfg.reentry_eps > 0 && cfg.reentry_eps < 1)) throw ArgumentError("reentry_eps must lie in (0, 1)");
  SoupSampler sampler(g, cfg.window, eq, cfg.kill_radius);
  return sampler.sample(cfg.u, rng);
}

SoupSample sample_full_window(const Graph& g, double u, const Ball& window, Rng& rng) {
  const KillRadius kill = default_kill_radius(g, window);
  return SoupSampler::full_window(g, window, kill.radius).sample(u, rng);
}

std::vector<SoupSample> layered_sample(const Graph& g, std::span<const double> levels, const Ball& window,
                                       Rng& rng) {
  const KillRadius kill = default_kill_radius(g, window);
  return SoupSampler::full_window(g, window, kill.radius).layered(levels, rng);
}

// ---------------------------------------------------------------------------

ProductDecompositionSampler::ProductDecompositionSampler(const Graph& g, Ball window, int kill_radius,
                                                         std::size_t mc_walks, std::uint64_t seed)
    : g_(g), window_(std::move(window)), kill_radius_(kill_radius) {
  if (g_.kind() != GraphKind::Product) throw ArgumentError("decomposition sampler needs a product graph");
  if (kill_radius_ < window_.radius) throw ArgumentError("kill radius must be at least the window radius");
  if (mc_walks == 0) throw ArgumentError("mc_walks must be positive");

  int top = 0;
  for (const auto& v : window_.members) top = std::max(top, g_.tree_depth(v));

  // Sites whose units can reach the window: within the kill ball, no deeper than the window.
  VertexSet seen = {window_.center};
  std::vector<Vertex> frontier = {window_.center};
  sites_.push_back(window_.center);
  for (int r = 0; r < kill_radius_; ++r) {
    std::vector<Vertex> next;
    for (const auto& v : frontier) {
      for (auto& w : g_.neighbors(v)) {
        if (g_.tree_depth(w) > top || seen.contains(w)) continue;
        seen.insert(w);
        next.push_back(w);
      }
    }
    sites_.insert(sites_.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(sites_.begin(), sites_.end());

  const auto coords = g_.coords(window_.center);
  const auto deg = static_cast<std::uint32_t>(g_.degree());
  never_back_.resize(static_cast<std::size_t>(top) + 1);
  never_below_.resize(static_cast<std::size_t>(top) + 1);
  for (int n = 0; n <= top; ++n) {
    const std::vector<int> word(static_cast<std::size_t>(n), 0);
    const Vertex rep = g_.make_vertex(word, coords);
    Rng rng(seed, static_cast<std::uint64_t>(n));
    auto& back = never_back_[static_cast<std::size_t>(n)];
    auto& below = never_below_[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < mc_walks; ++i) {
      Vertex v = rep;
      bool ok = true;
      g_.step(v, static_cast<int>(rng.below(deg)));
      while (g_.distance(rep, v) <= kill_radius_) {
        if (g_.tree_depth(v) <= n) {
          ok = false;
          break;
        }
        g_.step(v, static_cast<int>(rng.below(deg)));
      }
      back.add(ok);
      if (n == 0) {
        below.add(true);
        continue;
      }
      v = rep;
      ok = true;
      while (g_.distance(rep, v) <= kill_radius_) {
        if (g_.tree_depth(v) < n) {
          ok = false;
          break;
        }
        g_.step(v, static_cast<int>(rng.below(deg)));
      }
      below.add(ok);
    }
    const double rate = std::min(back.estimate(), below.estimate());
    if (rate < kMinAcceptance) throw FeasibilityError("conditioned walks are too rare at tree depth " + std::to_string(n), rate);
  }
}

double ProductDecompositionSampler::nu(int depth) const {
  const auto n = static_cast<std::size_t>(depth);
  return g_.degree() * never_back_.at(n).estimate() * never_below_.at(n).estimate();
}

double ProductDecompositionSampler::nu_ci(int depth) const {
  const auto n = static_cast<std::size_t>(depth);
  const auto& a = never_back_.at(n);
  const auto& b = never_below_.at(n);
  return 3.0 * g_.degree() * std::hypot(a.sigma() * b.estimate(), b.sigma() * a.estimate());
}

bool ProductDecompositionSampler::run_conditioned(const Vertex& x, int floor_depth, bool strict, SoupSample& s,
                                                  Rng& rng) const {
  // strict: after time 0 the walk stays strictly deeper than floor_depth.
  // otherwise: the walk never goes above floor_depth.
  const auto deg = static_cast<std::uint32_t>(g_.degree());
  constexpr std::uint64_t kMaxAttempts = 1'000'000;
  std::vector<std::size_t> hits;
  for (std::uint64_t attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    hits.clear();
    Vertex v = x;
    bool ok = true;
    bool first = true;
    for (;;) {
      const int dist = g_.distance(window_.center, v);
      if (dist > kill_radius_) break;
      const int depth = g_.tree_depth(v);
      if (strict ? (!first && depth <= floor_depth) : depth < floor_depth) {
        ok = false;
        break;
      }
      if (dist <= window_.radius) hits.push_back(window_.index.at(v));
      g_.step(v, static_cast<int>(rng.below(deg)));
      first = false;
    }
    if (ok) {
      for (auto i : hits) s.in_trace[i] = 1;
      return true;
    }
    if (attempt >= 1000 && 1.0 / static_cast<double>(attempt) < kMinAcceptance) {
      throw FeasibilityError("rejection sampling stalled", 1.0 / static_cast<double>(attempt));
    }
  }
  return false;
}

SoupSample ProductDecompositionSampler::sample(double u, Rng& rng) const {
  if (!(u >= 0) || !std::isfinite(u)) throw ArgumentError("intensity u must be finite and nonnegative");
  SoupSample s;
  s.u = u;
  s.in_trace.assign(window_.size(), 0);
  for (const auto& x : sites_) {
    const int n = g_.tree_depth(x);
    const std::uint64_t units = rng.poisson(u * nu(n));
    for (std::uint64_t i = 0; i < units; ++i) {
      run_conditioned(x, n, true, s, rng);
      run_conditioned(x, n, false, s, rng);
    }
    s.trajectory_count += units;
  }
  return s;
}

SoupSample product_decomposition_sample(const Graph& g, double u, const Ball& window, Rng& rng) {
  const KillRadius kill = default_kill_radius(g, window);
  ProductDecompositionSampler sampler(g, window, kill.radius, 20000, rng());
  return sampler.sample(u, rng);
}

// ---------------------------------------------------------------------------

InvarianceReport invariance_check(const Graph& g, double u, std::span<const Vertex> base, const Vertex& shift,
                                  std::size_t n_samples, std::uint64_t seed, int workers) {
  if (base.empty()) throw ArgumentError("invariance check needs a nonempty set");
  std::vector<Vertex> image;
  for (const auto& v : base) image.push_back(g.translate(v, shift));

  auto make = [&](std::span<const Vertex> k) {
    int radius = 0;
    for (const auto& v : k) radius = std::max(radius, g.distance(k.front(), v));
    Ball window = g.ball(k.front(), radius);
    Equilibrium eq = equilibrium(g, k);
    // Emptiness of K only needs the trajectory count, so the walks can stop at the window.
    return SoupSampler(g, std::move(window), std::move(eq), radius);
  };
  const SoupSampler first = make(base);
  const SoupSampler second = make(image);

  struct Acc {
    Frequency a, b;
    void merge(const Acc& o) {
      a.merge(o.a);
      b.merge(o.b);
    }
  };
  Acc acc = run_samples<Acc>(n_samples, seed, workers, [&](std::size_t, Rng& rng, Acc& out) {
    out.a.add(first.sample(u, rng).trajectory_count == 0);
    out.b.add(second.sample(u, rng).trajectory_count == 0);
  });
  InvarianceReport report;
  report.original = acc.a;
  report.shifted = acc.b;
  report.z = two_sample_z(acc.a, acc.b);
  report.agree = std::abs(report.z) < 3.0;
  return report;
}

}  // namespace interlace

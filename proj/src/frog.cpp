#include "interlace/frog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "interlace/errors.hpp"

namespace interlace {

std::vector<std::uint8_t> window_closure(const Ball& window, const std::vector<std::uint8_t>& set) {
  std::vector<std::uint8_t> out = set;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!set[i]) continue;
    for (auto j : window.adjacency[i]) out[j] = 1;
  }
  return out;
}

namespace {

std::vector<Vertex> collect(const Ball& window, const std::vector<std::uint8_t>& flags) {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.push_back(window.members[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FrogRun run_frog(const Graph& g, const FrogConfig& cfg, Rng& rng) {
  if (!(cfg.u >= 0) || !std::isfinite(cfg.u)) throw ArgumentError("intensity u must be finite and nonnegative");
  if (!(cfg.origin == cfg.window.center)) throw ArgumentError("frog origin must be the window center");
  if (cfg.kill_radius < cfg.window.radius) throw ArgumentError("kill radius must be at least the window radius");
  if (cfg.max_iterations < 1) throw ArgumentError("max_iterations must be positive");

  const Ball& w = cfg.window;
  const std::size_t n = w.size();
  // Sites are launched in canonical vertex order within a round.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w.members[a] < w.members[b]; });

  std::vector<std::uint8_t> active(n, 0), launched(n, 0), reached(n, 0);
  if (cfg.activate_all) {
    active.assign(n, 1);
  } else {
    active[0] = 1;
  }

  FrogRun run;
  run.activation_history.push_back(collect(w, active));
  const auto deg = static_cast<std::uint32_t>(g.degree());
  const double mean = cfg.u * g.degree();

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    for (auto i : order) {
      if (!active[i] || launched[i]) continue;
      launched[i] = 1;
      const std::uint64_t particles = rng.poisson(mean);
      run.particle_counts[w.members[i]] = particles;
      for (std::uint64_t p = 0; p < 2 * particles; ++p) {
        Vertex v = w.members[i];
        for (;;) {
          const int dist = g.distance(w.center, v);
          if (dist > cfg.kill_radius) break;
          if (dist <= w.radius) reached[w.index.at(v)] = 1;
          g.step(v, static_cast<int>(rng.below(deg)));
        }
      }
      run.walkers += 2 * particles;
    }
    std::vector<std::uint8_t> next = window_closure(w, reached);
    const bool same = next == active;
    active = std::move(next);
    run.activation_history.push_back(collect(w, active));
    if (same) {
      run.stabilized = true;
      break;
    }
  }
  run.trace = collect(w, reached);
  return run;
}

bool check_history(const Graph& g, const FrogRun& run, const Ball& window) {
  const auto& h = run.activation_history;
  auto subset = [](const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  for (std::size_t k = 2; k < h.size(); ++k) {
    if (!subset(h[k - 1], h[k])) return false;
  }
  if (h.size() > 1 && h[0].size() == 1 && !h[1].empty() && !subset(h[0], h[1])) return false;
  if (h.empty()) return false;
  for (const auto& v : run.trace) {
    if (!std::binary_search(h.back().begin(), h.back().end(), v)) return false;
    for (const auto& nb : g.neighbors(v)) {
      if (window.contains(nb) && !std::binary_search(h.back().begin(), h.back().end(), nb)) return false;
    }
  }
  return true;
}

}  // namespace interlace

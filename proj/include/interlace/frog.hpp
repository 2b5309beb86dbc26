#pragma once

#include <cstdint>
#include <vector>

#include "interlace/graph.hpp"
#include "interlace/rng.hpp"

namespace interlace {

struct FrogConfig {
  double u = 0.0;
  Vertex origin;          // must be the window center
  Ball window;
  int kill_radius = 0;    // walkers stop on leaving ball(origin, kill_radius)
  int max_iterations = 10000;
  bool activate_all = false;  // debug: every window site is awake from the start
};

struct FrogRun {
  VertexMap<std::uint64_t> particle_counts;  // drawn on first activation
  // activation_history[k] is the sorted activated set after round k.
  std::vector<std::vector<Vertex>> activation_history;
  std::vector<Vertex> trace;  // sorted; union of walker ranges inside the window
  std::uint64_t walkers = 0;
  bool stabilized = false;
};

/// Round k launches two walks per particle from every site of the previous
/// activated set not yet launched; the new activated set is the window-clipped
/// closure (set plus outer boundary) of everything walked so far.
FrogRun run_frog(const Graph& g, const FrogConfig& cfg, Rng& rng);

/// Monotone history from round 1 on (and round 0 into 1 when the origin had
/// particles), and every window vertex adjacent to the trace is activated.
bool check_history(const Graph& g, const FrogRun& run, const Ball& window);

/// Window indices of set plus its outer boundary, clipped to the window.
std::vector<std::uint8_t> window_closure(const Ball& window, const std::vector<std::uint8_t>& set);

}  // namespace interlace

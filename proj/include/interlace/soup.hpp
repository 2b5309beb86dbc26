#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "interlace/graph.hpp"
#include "interlace/potential.hpp"
#include "interlace/rng.hpp"
#include "interlace/stats.hpp"
#include "interlace/walk.hpp"

namespace interlace {

inline constexpr double kDefaultReentryEps = 1e-3;

struct SoupConfig {
  double u = 0.0;
  std::vector<Vertex> base;  // K, must lie in the window
  Ball window;
  int kill_radius = 0;       // walks stop on leaving ball(window.center, kill_radius)
  double reentry_eps = kDefaultReentryEps;
};

/// One draw of the interlacement trajectories meeting K, seen through the window.
struct SoupSample {
  double u = 0.0;
  std::uint64_t trajectory_count = 0;
  std::vector<Path> trajectories;      // filled only when the sampler keeps paths
  std::vector<std::uint8_t> in_trace;  // aligned with window.members
  // K != window: backward parts may re-enter the window and are not sampled.
  bool truncation_biased = false;

  bool contains(std::size_t window_index) const { return in_trace[window_index] != 0; }
  std::size_t trace_size() const;
  std::vector<Vertex> trace(const Ball& window) const;
  std::vector<Vertex> vacant(const Ball& window) const;
};

/// Kill radius with its re-entry bracket: the probability that a walk started
/// on the sphere of radius R+1 ever comes back into the window.
struct KillRadius {
  int radius = 0;
  double reentry = 0.0;
  bool capped = false;  // the bracket never went below eps within the search range
};

/// Trees: closed form (1/(d-1))^(R - r_w). Lattices and products: escape solve
/// for the window with probe points on a few rays, searched up to a fixed cap.
KillRadius default_kill_radius(const Graph& g, const Ball& window, double eps = kDefaultReentryEps);

/// Poisson soup sampler for a fixed (window, K, kill radius). Setup (the
/// equilibrium measure) is done once; sample() is the hot path.
class SoupSampler {
 public:
  SoupSampler(const Graph& g, Ball window, Equilibrium eq, int kill_radius, bool keep_paths = false);

  /// K = window.members; the forward-only trace is exact inside the window.
  static SoupSampler full_window(const Graph& g, Ball window, int kill_radius, double tol = 0,
                                 bool keep_paths = false);

  SoupSample sample(double u, Rng& rng) const;
  /// Nested samples at ascending levels: the first level, then independent
  /// Poisson increments of intensity (u_{i+1} - u_i) cap(K).
  std::vector<SoupSample> layered(std::span<const double> levels, Rng& rng) const;

  const Graph& graph() const { return g_; }
  const Ball& window() const { return window_; }
  const Equilibrium& equilibrium() const { return eq_; }
  int kill_radius() const { return kill_radius_; }
  bool exact() const { return exact_; }

  /// Adds n trajectories to the sample.
  void add_trajectories(SoupSample& s, std::uint64_t n, Rng& rng) const;

 private:
  SoupSample empty(double u) const;

  Graph g_;
  Ball window_;
  Equilibrium eq_;
  int kill_radius_;
  bool keep_paths_;
  bool exact_;
  std::vector<double> cumulative_;
};

SoupSample sample(const Graph& g, const SoupConfig& cfg, const Equilibrium& eq, Rng& rng);
SoupSample sample_full_window(const Graph& g, double u, const Ball& window, Rng& rng);
std::vector<SoupSample> layered_sample(const Graph& g, std::span<const double> levels, const Ball& window,
                                       Rng& rng);

/// Alternative sampler on Tree(d) x Z^d' from the partition of trajectories by
/// their first visit to the shallowest tree layer they reach: independent
/// Poisson(u nu_x) units per site, each launching two conditioned walks.
class ProductDecompositionSampler {
 public:
  /// nu is estimated per tree depth from `mc_walks` walks of each kind.
  ProductDecompositionSampler(const Graph& g, Ball window, int kill_radius, std::size_t mc_walks,
                              std::uint64_t seed);

  SoupSample sample(double u, Rng& rng) const;

  /// Estimated unit intensity for sites at tree depth n, and its 3-sigma CI radius.
  double nu(int depth) const;
  double nu_ci(int depth) const;
  int max_depth() const { return static_cast<int>(never_back_.size()) - 1; }
  const std::vector<Vertex>& sites() const { return sites_; }

 private:
  bool run_conditioned(const Vertex& x, int floor_depth, bool strict, SoupSample& s, Rng& rng) const;

  Graph g_;
  Ball window_;
  int kill_radius_;
  std::vector<Vertex> sites_;
  std::vector<Frequency> never_back_;   // P[H~ of the layer-n slab = inf]
  std::vector<Frequency> never_below_;  // P[never enter the layer-(n-1) slab]
};

/// Acceptance-rate floor of the rejection step.
inline constexpr double kMinAcceptance = 1e-3;

SoupSample product_decomposition_sample(const Graph& g, double u, const Ball& window, Rng& rng);

struct InvarianceReport {
  Frequency original;
  Frequency shifted;
  double z = 0.0;
  bool agree = true;  // |z| < 3
};

/// Emptiness frequencies of K and of its image under left translation by `shift`.
InvarianceReport invariance_check(const Graph& g, double u, std::span<const Vertex> base, const Vertex& shift,
                                  std::size_t n_samples, std::uint64_t seed, int workers = 1);

}  // namespace interlace

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "interlace/graph.hpp"
#include "interlace/rng.hpp"

namespace interlace {

enum class ExitReason { LeftRegion, StepBudget };

/// A finite piece of simple random walk. `steps[0]` is adjacent to `start`.
struct Path {
  Vertex start;
  std::vector<Vertex> steps;
  ExitReason exit_reason = ExitReason::StepBudget;
};

/// Simple random walk from `start` until it first leaves `region` or takes
/// `step_budget` steps. The exiting step is included in the path.
Path run_walk(const Graph& g, const Vertex& start, const Ball& region, long step_budget, Rng& rng);

/// Walks from `start` until the walk leaves the ball of radius `kill_radius`
/// around `center`, calling `visit(v)` on every vertex inside the ball
/// (including the start). Returns the number of steps taken. No allocation per
/// step; this is the hot loop of every sampler.
template <class Visit>
long walk_until_exit(const Graph& g, Vertex v, const Vertex& center, int kill_radius, Rng& rng, Visit&& visit) {
  long steps = 0;
  auto d = static_cast<std::uint32_t>(g.degree());
  while (g.distance(center, v) <= kill_radius) {
    visit(v);
    g.step(v, static_cast<int>(rng.below(d)));
    ++steps;
  }
  return steps;
}

/// Result of a potential solve: values at the queried vertices plus the
/// convergence record of the radius ladder.
struct SolveReport {
  VertexMap<double> values;
  int radius_used = 0;
  double tail_gap = 0.0;  // last decrement between successive radii
};

/// Which discretisation backs the harmonic solve.
enum class SolverBackend {
  Auto,      // symmetry-reduced on trees and products, explicit ball on lattices
  Explicit,  // sparse solve on the explicit neighborhood B(K, R)
};

struct EscapeOptions {
  std::vector<Vertex> watch;  // extra vertices whose avoid() value must also converge
  double tol = 0;          // 0 selects the family default (see default_tolerance)
  int max_radius = 0;      // 0 selects the family default
  SolverBackend backend = SolverBackend::Auto;
  std::size_t budget = kDefaultBallBudget;
};

/// Default solver tolerance per graph family: 1e-9 trees, 1e-6 products,
/// 1e-3 lattices (polynomial tail there).
double default_tolerance(const Graph& g);

namespace detail {
struct EscapeEvaluator {
  virtual ~EscapeEvaluator() = default;
  virtual double escape(const Vertex& x) const = 0;
  virtual double avoid(const Vertex& z) const = 0;
};
}  // namespace detail

/// Harmonic solution of the escape problem for a finite set K.
///
/// h_R(z) solves h = mean of h over neighbors on B(K,R) \ K with h = 0 on K and
/// h = 1 on the outer boundary of B(K,R). h_R decreases to P_z[H_K = inf] as
/// R grows; the radius ladder stops once successive values differ by < tol.
class EscapeSolution {
 public:
  /// P_x[H~_K = inf] for x in K (one forced step, then never hit K).
  double escape(const Vertex& x) const;
  /// P_z[H_K = inf] for any z (0 on K).
  double avoid(const Vertex& z) const;

  const std::vector<Vertex>& base() const { return base_; }
  int radius() const { return radius_; }
  double tail_gap() const { return tail_gap_; }
  double tol() const { return tol_; }
  /// Escape values h_R over the radius ladder for base()[0] (nonincreasing).
  const std::vector<double>& ladder() const { return ladder_; }

 private:
  friend EscapeSolution solve_escape(const Graph&, std::span<const Vertex>, const EscapeOptions&);
  friend EscapeSolution solve_escape_at_radius(const Graph&, std::span<const Vertex>, int, SolverBackend, std::size_t);

  std::shared_ptr<const detail::EscapeEvaluator> eval_;
  std::vector<Vertex> base_;
  int radius_ = 0;
  double tail_gap_ = 0.0;
  double tol_ = 0.0;
  std::vector<double> ladder_;
};

/// Runs the radius ladder. Throws ConvergenceError when max_radius is reached.
EscapeSolution solve_escape(const Graph& g, std::span<const Vertex> base, const EscapeOptions& options = {});

/// Single solve at a fixed radius R (no ladder); exposed for oracles and tests.
EscapeSolution solve_escape_at_radius(const Graph& g, std::span<const Vertex> base, int radius,
                                      SolverBackend backend = SolverBackend::Auto,
                                      std::size_t budget = kDefaultBallBudget);

/// P_y[H~_K = inf] if y is in K, else P_y[H_K = inf].
SolveReport escape_probability(const Graph& g, std::span<const Vertex> base, const Vertex& y, double tol);

/// Green's function g(x,y) = sum_n p^(n)(x,y) = P_x[H_y < inf] / P_y[H~_y = inf].
double green(const Graph& g, const Vertex& x, const Vertex& y, double tol);

enum class SpectralMode { ClosedForm, PowerEstimate };

struct SpectralEstimate {
  double value = 0.0;     // closed form, or decay-rate fit for the power estimate
  double raw_root = 0.0;  // (p^(n_max)(x,x))^(1/n_max); power estimate only
  std::vector<double> returns;  // p^(k)(x,x) for k = 0..n_max; power estimate only
  double max_mass_defect = 0.0;  // max |sum_y p^(k)(x,y) - 1| over iterations
};

/// Spectral radius. The power estimate iterates the exact distribution of the
/// walk (reduced by the automorphisms fixing the start) for n_max steps and
/// fits log p^(2k) = c + 2k log(rho) - beta log(k) over k in [n_max/4, n_max/2].
SpectralEstimate spectral_radius(const Graph& g, int n_max, SpectralMode mode);
double spectral_radius_closed_form(const Graph& g);

}  // namespace interlace

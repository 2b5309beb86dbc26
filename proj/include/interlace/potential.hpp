#pragma once

#include <span>
#include <vector>

#include "interlace/graph.hpp"

namespace interlace {

/// Equilibrium measure of a finite set: weight d_x * P_x[H~_K = inf] on x in K.
struct Equilibrium {
  std::vector<Vertex> base;     // canonical order
  std::vector<double> weights;  // aligned with base
  double cap = 0.0;
  double tol = 0.0;
  int radius = 0;         // solver radius the ladder stopped at
  double tail_gap = 0.0;

  double weight(const Vertex& x) const;  // 0 off the base
};

/// One harmonic solve for all of K. tol is the target accuracy of cap (0 selects
/// the family default); on lattices it is the ladder decrement threshold.
Equilibrium equilibrium(const Graph& g, std::span<const Vertex> base, double tol = 0);

inline double capacity(const Graph& g, std::span<const Vertex> base, double tol = 0) {
  return equilibrium(g, base, tol).cap;
}

}  // namespace interlace

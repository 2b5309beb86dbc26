#include "interlace/potential.hpp"

#include <algorithm>

#include "interlace/errors.hpp"
#include "interlace/walk.hpp"

namespace interlace {

double Equilibrium::weight(const Vertex& x) const {
  auto it = std::lower_bound(base.begin(), base.end(), x);
  if (it == base.end() || !(*it == x)) return 0.0;
  return weights[static_cast<std::size_t>(it - base.begin())];
}

Equilibrium equilibrium(const Graph& g, std::span<const Vertex> base, double tol) {
  if (!g.transient()) throw DomainError("capacity is zero on recurrent graph " + g.spec());
  EscapeOptions options;
  const double cap_tol = tol > 0 ? tol : default_tolerance(g);
  // tol bounds the capacity, so each escape value gets a share of it. Tree and
  // product ladders converge geometrically (error ~ last decrement); lattice
  // values are extrapolated and the decrement only signals convergence there.
  options.tol = g.kind() == GraphKind::Lattice
                    ? cap_tol
                    : cap_tol / (static_cast<double>(g.degree()) * static_cast<double>(std::max<std::size_t>(1, base.size())));
  EscapeSolution sol = solve_escape(g, base, options);

  Equilibrium eq;
  eq.base = sol.base();
  eq.tol = cap_tol;
  eq.radius = sol.radius();
  eq.tail_gap = sol.tail_gap();
  eq.weights.reserve(eq.base.size());
  for (const auto& x : eq.base) {
    eq.weights.push_back(g.degree() * sol.escape(x));
    eq.cap += eq.weights.back();
  }
  return eq;
}

}  // namespace interlace

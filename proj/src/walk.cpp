#include "interlace/walk.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <unordered_map>

#include "interlace/errors.hpp"

namespace interlace {

Path run_walk(const Graph& g, const Vertex& start, const Ball& region, long step_budget, Rng& rng) {
  if (step_budget < 1) throw ArgumentError("step budget must be at least 1");
  if (!region.contains(start)) throw ArgumentError("walk must start inside its region");
  Path path;
  path.start = start;
  Vertex v = start;
  const auto d = static_cast<std::uint32_t>(g.degree());
  for (long s = 0; s < step_budget; ++s) {
    g.step(v, static_cast<int>(rng.below(d)));
    path.steps.push_back(v);
    if (!region.contains(v)) {
      path.exit_reason = ExitReason::LeftRegion;
      return path;
    }
  }
  path.exit_reason = ExitReason::StepBudget;
  return path;
}

double spectral_radius_closed_form(const Graph& g) {
  switch (g.kind()) {
    case GraphKind::Lattice:
      return 1.0;
    case GraphKind::RegularTree: {
      const double d = g.tree_degree();
      return 2.0 * std::sqrt(d - 1) / d;
    }
    case GraphKind::Product: {
      // Convex combination of the commuting coordinate transition operators.
      const double d = g.tree_degree();
      const double tree_rho = 2.0 * std::sqrt(d - 1) / d;
      const double lattice_moves = 2.0 * g.lattice_dim();
      return (d * tree_rho + lattice_moves) / (d + lattice_moves);
    }
  }
  return 1.0;
}

namespace {

// Orbit of a vertex under the automorphisms fixing the start: tree depth and
// the sorted absolute lattice coordinates.
using Orbit = std::vector<int>;

std::string orbit_key(const Orbit& o) {
  std::string key(sizeof(int) * o.size(), '\0');
  std::memcpy(key.data(), o.data(), key.size());
  return key;
}

struct OrbitChain {
  std::vector<Orbit> states;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out;
};

OrbitChain build_orbit_chain(const Graph& g, int radius) {
  const bool has_tree = g.kind() != GraphKind::Lattice;
  const int dim = g.lattice_dim();
  const double p = 1.0 / g.degree();
  const int d = g.tree_degree();

  auto transitions = [&](const Orbit& o) {
    std::vector<std::pair<Orbit, double>> next;
    const std::size_t off = has_tree ? 1 : 0;
    if (has_tree) {
      Orbit up = o;
      if (o[0] == 0) {
        up[0] = 1;
        next.emplace_back(up, p * d);
      } else {
        up[0] = o[0] + 1;
        next.emplace_back(up, p * (d - 1));
        Orbit down = o;
        down[0] = o[0] - 1;
        next.emplace_back(down, p);
      }
    }
    for (int i = 0; i < dim; ++i) {
      const std::size_t idx = off + static_cast<std::size_t>(i);
      Orbit away = o;
      away[idx] += 1;
      std::sort(away.begin() + static_cast<long>(off), away.end(), std::greater<>());
      if (o[idx] == 0) {
        next.emplace_back(away, 2 * p);
      } else {
        next.emplace_back(away, p);
        Orbit toward = o;
        toward[idx] -= 1;
        std::sort(toward.begin() + static_cast<long>(off), toward.end(), std::greater<>());
        next.emplace_back(toward, p);
      }
    }
    return next;
  };
  auto norm = [](const Orbit& o) {
    int s = 0;
    for (int x : o) s += x;
    return s;
  };

  OrbitChain chain;
  std::unordered_map<std::string, std::uint32_t> index;
  Orbit start((has_tree ? 1 : 0) + static_cast<std::size_t>(dim), 0);
  chain.states.push_back(start);
  index.emplace(orbit_key(start), 0);
  for (std::size_t head = 0; head < chain.states.size(); ++head) {
    std::vector<std::pair<std::uint32_t, double>> row;
    for (auto& [o, prob] : transitions(chain.states[head])) {
      if (norm(o) > radius) continue;  // unreachable within the iteration horizon
      auto [it, inserted] = index.emplace(orbit_key(o), static_cast<std::uint32_t>(chain.states.size()));
      if (inserted) chain.states.push_back(o);
      row.emplace_back(it->second, prob);
    }
    chain.out.push_back(std::move(row));
  }
  return chain;
}

}  // namespace

SpectralEstimate spectral_radius(const Graph& g, int n_max, SpectralMode mode) {
  SpectralEstimate est;
  if (mode == SpectralMode::ClosedForm) {
    est.value = spectral_radius_closed_form(g);
    return est;
  }
  if (n_max < 8 || n_max % 2 != 0) throw ArgumentError("power estimate needs an even n_max >= 8");
  if (g.kind() != GraphKind::RegularTree) {
    // Orbit count grows like n_max^(lattice_dim + tree) / dim!; guard memory.
    double states = 1;
    const int dims = g.lattice_dim() + (g.kind() == GraphKind::Product ? 1 : 0);
    for (int i = 1; i <= dims; ++i) states = states * (n_max + i) / i;
    if (states > 5e7) throw ResourceError("power estimate orbit space too large", static_cast<std::size_t>(states));
  }
  const OrbitChain chain = build_orbit_chain(g, n_max);
  std::vector<double> mass(chain.states.size(), 0.0);
  std::vector<double> next(chain.states.size(), 0.0);
  mass[0] = 1.0;
  est.returns.push_back(1.0);
  for (int step = 1; step <= n_max; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (mass[i] == 0) continue;
      for (const auto& [j, prob] : chain.out[i]) next[j] += mass[i] * prob;
    }
    std::swap(mass, next);
    double total = 0;
    for (double m : mass) total += m;
    est.max_mass_defect = std::max(est.max_mass_defect, std::abs(total - 1.0));
    est.returns.push_back(mass[0]);
  }
  est.raw_root = std::pow(est.returns[static_cast<std::size_t>(n_max)], 1.0 / n_max);

  // Least squares for log p^(2k) = c + 2k log(rho) - beta log k.
  const int k_hi = n_max / 2;
  const int k_lo = std::max(2, n_max / 4);
  Eigen::MatrixXd a(k_hi - k_lo + 1, 3);
  Eigen::VectorXd y(k_hi - k_lo + 1);
  for (int k = k_lo; k <= k_hi; ++k) {
    const int row = k - k_lo;
    a(row, 0) = 1.0;
    a(row, 1) = 2.0 * k;
    a(row, 2) = std::log(static_cast<double>(k));
    y[row] = std::log(est.returns[static_cast<std::size_t>(2 * k)]);
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  est.value = std::min(1.0, std::exp(coef[1]));
  return est;
}

}  // namespace interlace

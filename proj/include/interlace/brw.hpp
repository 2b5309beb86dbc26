#pragma once

#include <cstdint>
#include <vector>

#include "interlace/graph.hpp"
#include "interlace/rng.hpp"
#include "interlace/stats.hpp"

namespace interlace {

/// Circle nodes branch: two bullet children plus Poisson(u Delta^2) circle
/// children. Bullet nodes carry one bullet child plus Poisson(u Delta^2) circle
/// children. Chains of bullets are the walk lines.
enum class NodeType : std::uint8_t { Circle, Bullet };

struct GwNode {
  std::uint32_t id = 0;
  std::int64_t parent = -1;  // -1 for generation 0
  NodeType type = NodeType::Circle;
  int generation = 0;
};

struct BrwRun {
  std::vector<GwNode> tree;      // generation order; tree[i].id == i
  std::vector<Vertex> positions; // aligned with tree
  std::vector<std::uint64_t> circles;  // per generation
  std::vector<std::uint64_t> bullets;  // per generation
  int n_max = 0;
  bool truncated = false;  // node budget ran out before generation n_max

  std::uint64_t generation_size(int n) const {
    return circles.at(static_cast<std::size_t>(n)) + bullets.at(static_cast<std::size_t>(n));
  }
};

/// Branching intensity u * Delta^2 of the circle-offspring law.
inline double branching_mean(double u, int max_degree) { return u * max_degree * max_degree; }

BrwRun sample_brw(const Graph& g, const Vertex& x, double u, int n_max, std::size_t node_budget, Rng& rng);

/// Structural check of the offspring table on every node below the cutoff.
bool check_structure(const Graph& g, const BrwRun& run);

struct GenerationSizes {
  std::vector<double> exact;     // E|T_n|, n = 0..n_max
  std::vector<double> envelope;  // c (1 + 2 u Delta^2)^n
  double envelope_constant = 0.0;
};

GenerationSizes expected_generation_sizes(double u, int max_degree, int n_max);

struct HitEstimate {
  Frequency hits;
  double estimate = 0.0;
  double ci = 0.0;             // 3 sigma
  double tail_envelope = 0.0;  // (xi rho (1 + 2 u Delta^2))^n_max, not a probability when >= 1
  bool subcritical = true;     // u below (1/(2 Delta^2)) (1/rho - 1)
};

/// P[some node of the tree sits at y], trees cut at generation n_max.
HitEstimate hit_probability(const Graph& g, const Vertex& x, const Vertex& y, double u, int n_max,
                            std::size_t n_samples, std::uint64_t seed, int workers = 1, double xi = 1.0);

}  // namespace interlace

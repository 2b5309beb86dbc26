#include "interlace/brw.hpp"

#include <algorithm>
#include <cmath>

#include "interlace/errors.hpp"
#include "interlace/parallel.hpp"
#include "interlace/walk.hpp"

namespace interlace {

namespace {

void check_args(double u, int n_max) {
  if (!(u >= 0) || !std::isfinite(u)) throw ArgumentError("intensity u must be finite and nonnegative");
  if (n_max < 0) throw ArgumentError("n_max must be nonnegative");
}

}  // namespace

BrwRun sample_brw(const Graph& g, const Vertex& x, double u, int n_max, std::size_t node_budget, Rng& rng) {
  check_args(u, n_max);
  g.validate(x);
  const double lambda = branching_mean(u, g.degree());
  const auto deg = static_cast<std::uint32_t>(g.degree());

  BrwRun run;
  run.n_max = n_max;
  run.circles.assign(static_cast<std::size_t>(n_max) + 1, 0);
  run.bullets.assign(static_cast<std::size_t>(n_max) + 1, 0);

  auto add = [&](std::int64_t parent, NodeType type, int generation, Vertex pos) {
    if (run.tree.size() >= node_budget) {
      run.truncated = true;
      return false;
    }
    GwNode node;
    node.id = static_cast<std::uint32_t>(run.tree.size());
    node.parent = parent;
    node.type = type;
    node.generation = generation;
    run.tree.push_back(node);
    run.positions.push_back(std::move(pos));
    auto& tally = type == NodeType::Circle ? run.circles : run.bullets;
    ++tally[static_cast<std::size_t>(generation)];
    return true;
  };

  const std::uint64_t roots = rng.poisson(lambda);
  for (std::uint64_t i = 0; i < roots; ++i) {
    if (!add(-1, NodeType::Circle, 0, x)) return run;
  }
  std::size_t begin = 0;
  for (int n = 0; n < n_max; ++n) {
    const std::size_t end = run.tree.size();
    for (std::size_t i = begin; i < end; ++i) {
      const GwNode node = run.tree[i];
      const auto parent = static_cast<std::int64_t>(i);
      auto child_at = [&](NodeType type) {
        return add(parent, type, n + 1, g.neighbor(run.positions[i], static_cast<int>(rng.below(deg))));
      };
      const int bullets = node.type == NodeType::Circle ? 2 : 1;
      for (int b = 0; b < bullets; ++b) {
        if (!child_at(NodeType::Bullet)) return run;
      }
      const std::uint64_t circles = rng.poisson(lambda);
      for (std::uint64_t c = 0; c < circles; ++c) {
        if (!child_at(NodeType::Circle)) return run;
      }
    }
    begin = end;
  }
  return run;
}

bool check_structure(const Graph& g, const BrwRun& run) {
  if (run.positions.size() != run.tree.size()) return false;
  std::vector<int> bullet_children(run.tree.size(), 0);
  for (std::size_t i = 0; i < run.tree.size(); ++i) {
    const GwNode& node = run.tree[i];
    if (node.id != i) return false;
    if (node.parent < 0) {
      if (node.generation != 0 || node.type != NodeType::Circle) return false;
      continue;
    }
    const auto p = static_cast<std::size_t>(node.parent);
    if (p >= i || run.tree[p].generation + 1 != node.generation) return false;
    if (!g.adjacent(run.positions[p], run.positions[i])) return false;
    if (node.type == NodeType::Bullet) ++bullet_children[p];
  }
  if (run.truncated) return true;
  for (std::size_t i = 0; i < run.tree.size(); ++i) {
    if (run.tree[i].generation >= run.n_max) continue;
    const int want = run.tree[i].type == NodeType::Circle ? 2 : 1;
    if (bullet_children[i] != want) return false;
  }
  return true;
}

GenerationSizes expected_generation_sizes(double u, int max_degree, int n_max) {
  check_args(u, n_max);
  if (max_degree < 1) throw ArgumentError("max degree must be positive");
  const double lambda = branching_mean(u, max_degree);
  GenerationSizes out;
  for (int n = 0; n <= n_max; ++n) {
    double value;
    if (n == 0) {
      value = lambda;
    } else if (n == 1) {
      value = (2 + lambda) * lambda;
    } else {
      value = (1 + lambda) * out.exact[static_cast<std::size_t>(n - 1)] + lambda * out.exact[static_cast<std::size_t>(n - 2)];
    }
    out.exact.push_back(value);
  }
  const double growth = 1 + 2 * lambda;
  out.envelope_constant = std::max(lambda, (2 + lambda) * lambda / growth);
  for (int n = 0; n <= n_max; ++n) out.envelope.push_back(out.envelope_constant * std::pow(growth, n));
  return out;
}

HitEstimate hit_probability(const Graph& g, const Vertex& x, const Vertex& y, double u, int n_max,
                            std::size_t n_samples, std::uint64_t seed, int workers, double xi) {
  check_args(u, n_max);
  g.validate(x);
  g.validate(y);
  const double lambda = branching_mean(u, g.degree());
  const auto deg = static_cast<std::uint32_t>(g.degree());
  const int target = g.distance(x, y);

  HitEstimate out;
  const double rho = spectral_radius_closed_form(g);
  out.subcritical = rho < 1 && u < (1.0 / (2.0 * g.degree() * g.degree())) * (1.0 / rho - 1.0);
  out.tail_envelope = std::pow(xi * rho * (1 + 2 * lambda), n_max);

  struct Node {
    Vertex pos;
    bool circle;
  };
  out.hits = run_samples<Frequency>(n_samples, seed, workers, [&](std::size_t, Rng& rng, Frequency& acc) {
    std::vector<Node> current, next;
    const std::uint64_t roots = rng.poisson(lambda);
    for (std::uint64_t i = 0; i < roots; ++i) current.push_back({x, true});
    bool hit = roots > 0 && target == 0;
    for (int n = 0; n < n_max && !hit && !current.empty(); ++n) {
      next.clear();
      const int left = n_max - n - 1;  // generations still available after this step
      for (const Node& node : current) {
        const int kids = node.circle ? 2 : 1;
        const std::uint64_t circles = rng.poisson(lambda);
        for (std::uint64_t k = 0; k < kids + circles; ++k) {
          Node child{g.neighbor(node.pos, static_cast<int>(rng.below(deg))), k >= static_cast<std::uint64_t>(kids)};
          const int dist = g.distance(child.pos, y);
          if (dist == 0) {
            hit = true;
            break;
          }
          // Nodes that cannot reach y before the cutoff are dropped.
          if (dist <= left) next.push_back(std::move(child));
        }
        if (hit) break;
      }
      std::swap(current, next);
    }
    acc.add(hit);
  });
  out.estimate = out.hits.estimate();
  out.ci = out.hits.ci_radius(3.0);
  return out;
}

}  // namespace interlace

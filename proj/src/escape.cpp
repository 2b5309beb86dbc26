#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "interlace/errors.hpp"
#include "interlace/walk.hpp"

namespace interlace {

namespace {

constexpr double kLinearTolerance = 1e-12;

std::vector<Vertex> canonical_base(const Graph& g, std::span<const Vertex> base) {
  if (base.empty()) throw ArgumentError("escape problem needs a nonempty base set");
  std::vector<Vertex> out(base.begin(), base.end());
  for (const auto& v : out) g.validate(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Explicit neighborhood solve (any graph).

class ExplicitEvaluator final : public detail::EscapeEvaluator {
 public:
  ExplicitEvaluator(const Graph& g, const std::vector<Vertex>& base, int radius, std::size_t budget)
      : g_(g), nb_(g.neighborhood(base, radius, budget)), h_(nb_.members.size(), 0.0) {
    const std::size_t n = nb_.members.size();
    // Unknowns are the non-source members (depth >= 1).
    std::vector<int> unknown(n, -1);
    int n_unknown = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (nb_.depth[i] > 0) unknown[i] = n_unknown++;
    }
    if (n_unknown == 0) return;
    const double p = 1.0 / g.degree();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n_unknown) * static_cast<std::size_t>(g.degree() + 1));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);
    for (std::size_t i = 0; i < n; ++i) {
      const int row = unknown[i];
      if (row < 0) continue;
      triplets.emplace_back(row, row, 1.0);
      for (int k = 0; k < g.degree(); ++k) {
        auto it = nb_.index.find(g.neighbor(nb_.members[i], k));
        if (it == nb_.index.end()) {
          rhs[row] += p;  // outer boundary carries h = 1
        } else if (unknown[it->second] >= 0) {
          triplets.emplace_back(row, unknown[it->second], -p);
        }
      }
    }
    Eigen::SparseMatrix<double> a(n_unknown, n_unknown);
    a.setFromTriplets(triplets.begin(), triplets.end());
    // I - P restricted to the interior is symmetric positive definite on a
    // regular graph.
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(kLinearTolerance);
    cg.setMaxIterations(std::max(1000, 20 * n_unknown));
    cg.compute(a);
    Eigen::VectorXd x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) {
      throw ConvergenceError("conjugate gradient did not converge on the escape system", 0.0, cg.error());
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (unknown[i] >= 0) h_[i] = std::clamp(x[unknown[i]], 0.0, 1.0);
    }
  }

  double escape(const Vertex& x) const override {
    auto it = nb_.index.find(x);
    if (it == nb_.index.end() || nb_.depth[it->second] != 0) throw ArgumentError("escape() needs a base vertex");
    return neighbor_mean(x);
  }

  double avoid(const Vertex& z) const override {
    auto it = nb_.index.find(z);
    if (it == nb_.index.end()) return 1.0;
    return h_[it->second];
  }

 private:
  double neighbor_mean(const Vertex& x) const {
    double total = 0;
    for (int k = 0; k < g_.degree(); ++k) total += avoid(g_.neighbor(x, k));
    return total / g_.degree();
  }

  Graph g_;
  Neighborhood nb_;
  std::vector<double> h_;
};

// ---------------------------------------------------------------------------
// Tree hull helpers. The convex hull of K in a tree is the union of geodesics
// between its points; outside the hull the harmonic function depends only on
// the attachment point and the depth below it.

struct TreeHull {
  std::vector<std::vector<int>> words;  // hull vertices as tree words
  std::vector<Vertex> tree_vertices;    // as vertices of the pure tree
  VertexMap<int> index;
  std::vector<std::vector<int>> adjacency;
  std::vector<int> branches;            // d - deg_H(a)
};

TreeHull tree_hull(const Graph& tree, const std::vector<std::vector<int>>& words) {
  TreeHull hull;
  auto add = [&](const std::vector<int>& w) {
    Vertex v = tree.make_vertex(w, {});
    if (hull.index.emplace(v, static_cast<int>(hull.words.size())).second) {
      hull.words.push_back(w);
      hull.tree_vertices.push_back(v);
    }
  };
  const auto& w0 = words.front();
  add(w0);
  for (const auto& w : words) {
    std::size_t common = 0;
    while (common < w0.size() && common < w.size() && w0[common] == w[common]) ++common;
    for (std::size_t len = common; len <= w0.size(); ++len) add(std::vector<int>(w0.begin(), w0.begin() + static_cast<long>(len)));
    for (std::size_t len = common; len <= w.size(); ++len) add(std::vector<int>(w.begin(), w.begin() + static_cast<long>(len)));
  }
  const std::size_t n = hull.words.size();
  hull.adjacency.resize(n);
  hull.branches.assign(n, tree.tree_degree());
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < tree.tree_degree(); ++k) {
      auto it = hull.index.find(tree.neighbor(hull.tree_vertices[i], k));
      if (it != hull.index.end()) {
        hull.adjacency[i].push_back(it->second);
        --hull.branches[i];
      }
    }
  }
  return hull;
}

// Nearest hull vertex and the distance to it, for a tree word.
std::pair<int, int> project(const Graph& tree, const TreeHull& hull, const Vertex& t) {
  int best = -1;
  int best_d = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < hull.tree_vertices.size(); ++i) {
    const int d = tree.distance(t, hull.tree_vertices[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return {best, best_d};
}

// ---------------------------------------------------------------------------
// Regular tree: exact reduced solve on the hull with closed-form branches.

class TreeEvaluator final : public detail::EscapeEvaluator {
 public:
  TreeEvaluator(const Graph& g, const std::vector<Vertex>& base, int radius)
      : g_(g), radius_(radius), r_(1.0 / (g.tree_degree() - 1)) {
    std::vector<std::vector<int>> words;
    for (const auto& v : base) words.push_back(g.tree_word(v));
    hull_ = tree_hull(g, words);
    const std::size_t n = hull_.words.size();
    in_base_.assign(n, false);
    dist_.assign(n, std::numeric_limits<int>::max());
    for (const auto& v : base) in_base_[static_cast<std::size_t>(hull_.index.at(v))] = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& v : base) dist_[i] = std::min(dist_[i], g.distance(hull_.tree_vertices[i], v));
      if (dist_[i] > radius) throw ArgumentError("radius smaller than the hull of the base set");
    }
    h_.assign(n, 0.0);
    std::vector<int> unknown(n, -1);
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_base_[i]) unknown[i] = m++;
    }
    if (m == 0) return;
    const double d = g.tree_degree();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < n; ++i) {
      const int row = unknown[i];
      if (row < 0) continue;
      const double phi = first_step_escape(radius_ + 1 - dist_[i]);
      const double c = hull_.branches[i];
      a(row, row) = 1.0 - c * (1.0 - phi) / d;
      b[row] = c * phi / d;
      for (int j : hull_.adjacency[i]) {
        if (unknown[static_cast<std::size_t>(j)] >= 0) a(row, unknown[static_cast<std::size_t>(j)]) -= 1.0 / d;
      }
    }
    Eigen::VectorXd x = a.partialPivLu().solve(b);
    for (std::size_t i = 0; i < n; ++i) {
      if (unknown[i] >= 0) h_[i] = std::clamp(x[unknown[i]], 0.0, 1.0);
    }
  }

  double escape(const Vertex& x) const override {
    auto it = hull_.index.find(x);
    if (it == hull_.index.end() || !in_base_[static_cast<std::size_t>(it->second)]) {
      throw ArgumentError("escape() needs a base vertex");
    }
    const auto i = static_cast<std::size_t>(it->second);
    double total = hull_.branches[i] * first_step_escape(radius_ + 1);
    for (int j : hull_.adjacency[i]) total += h_[static_cast<std::size_t>(j)];
    return total / g_.tree_degree();
  }

  double avoid(const Vertex& z) const override {
    const auto [a, j] = project(g_, hull_, z);
    const auto ai = static_cast<std::size_t>(a);
    if (j == 0) return h_[ai];
    const int depth_to_boundary = radius_ + 1 - dist_[ai];
    if (j >= depth_to_boundary) return 1.0;
    const double f = (1.0 - std::pow(r_, j)) / (1.0 - std::pow(r_, depth_to_boundary));
    return h_[ai] + (1.0 - h_[ai]) * f;
  }

 private:
  // Probability that the branch chain started at depth 1 reaches depth J
  // before depth 0; gambler's ruin with down/up ratio 1/(d-1).
  double first_step_escape(int depth_to_boundary) const {
    if (depth_to_boundary <= 1) return 1.0;
    return (1.0 - r_) / (1.0 - std::pow(r_, depth_to_boundary));
  }

  Graph g_;
  int radius_;
  double r_;
  TreeHull hull_;
  std::vector<bool> in_base_;
  std::vector<int> dist_;
  std::vector<double> h_;
};

// ---------------------------------------------------------------------------
// Product tree x lattice: reduce the tree coordinate to (hull vertex, depth
// below it); keep the lattice coordinate explicit.

class ProductEvaluator final : public detail::EscapeEvaluator {
 public:
  ProductEvaluator(const Graph& g, const std::vector<Vertex>& base, int radius, std::size_t budget)
      : g_(g), tree_(Graph::tree(g.tree_degree())), radius_(radius), dim_(g.lattice_dim()) {
    std::vector<std::vector<int>> words;
    for (const auto& v : base) {
      words.push_back(g.tree_word(v));
      base_coords_.push_back(g.coords(v));
    }
    hull_ = tree_hull(tree_, words);
    const std::size_t nh = hull_.words.size();
    hull_to_base_.assign(nh, std::vector<int>(base.size()));
    for (std::size_t i = 0; i < nh; ++i) {
      for (std::size_t k = 0; k < base.size(); ++k) {
        hull_to_base_[i][k] = tree_.distance(hull_.tree_vertices[i], tree_.make_vertex(words[k], {}));
      }
    }
    for (const auto& v : base) {
      auto [a, j] = project(tree_, hull_, tree_.make_vertex(g.tree_word(v), {}));
      base_keys_.push_back(encode(a, 0, g.coords(v)));
    }
    for (std::size_t k = 0; k < base_keys_.size(); ++k) {
      if (distance_to_base(decode(base_keys_[k])) != 0) throw ArgumentError("inconsistent product base");
    }
    build(budget);
  }

  double escape(const Vertex& x) const override {
    const std::string key = key_of(x);
    if (std::find(base_keys_.begin(), base_keys_.end(), key) == base_keys_.end()) {
      throw ArgumentError("escape() needs a base vertex");
    }
    double total = 0;
    for (const auto& [target, p] : transitions(decode(key))) total += p * value_of(target);
    return total;
  }

  double avoid(const Vertex& z) const override { return value_of(key_of(z)); }

 private:
  struct State {
    int hull;
    int depth;
    std::vector<int> coords;
  };

  std::string encode(int a, int j, const std::vector<int>& z) const {
    std::string key;
    key.resize(sizeof(int) * (2 + z.size()));
    std::memcpy(key.data(), &a, sizeof(int));
    std::memcpy(key.data() + sizeof(int), &j, sizeof(int));
    std::memcpy(key.data() + 2 * sizeof(int), z.data(), sizeof(int) * z.size());
    return key;
  }

  State decode(const std::string& key) const {
    State s;
    std::memcpy(&s.hull, key.data(), sizeof(int));
    std::memcpy(&s.depth, key.data() + sizeof(int), sizeof(int));
    s.coords.resize(static_cast<std::size_t>(dim_));
    std::memcpy(s.coords.data(), key.data() + 2 * sizeof(int), sizeof(int) * s.coords.size());
    return s;
  }

  std::string key_of(const Vertex& v) const {
    auto [a, j] = project(tree_, hull_, tree_.make_vertex(g_.tree_word(v), {}));
    return encode(a, j, g_.coords(v));
  }

  int distance_to_base(const State& s) const {
    int best = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < base_coords_.size(); ++k) {
      int d = hull_to_base_[static_cast<std::size_t>(s.hull)][k];
      for (int i = 0; i < dim_; ++i) d += std::abs(s.coords[static_cast<std::size_t>(i)] - base_coords_[k][static_cast<std::size_t>(i)]);
      best = std::min(best, d);
    }
    return s.depth + best;
  }

  std::vector<std::pair<std::string, double>> transitions(const State& s) const {
    const double p = 1.0 / g_.degree();
    std::vector<std::pair<std::string, double>> out;
    const auto a = static_cast<std::size_t>(s.hull);
    if (s.depth == 0) {
      for (int b : hull_.adjacency[a]) out.emplace_back(encode(b, 0, s.coords), p);
      if (hull_.branches[a] > 0) out.emplace_back(encode(s.hull, 1, s.coords), p * hull_.branches[a]);
    } else {
      out.emplace_back(encode(s.hull, s.depth - 1, s.coords), p);
      out.emplace_back(encode(s.hull, s.depth + 1, s.coords), p * (tree_.tree_degree() - 1));
    }
    for (int i = 0; i < dim_; ++i) {
      for (int delta : {1, -1}) {
        auto z = s.coords;
        z[static_cast<std::size_t>(i)] += delta;
        out.emplace_back(encode(s.hull, s.depth, z), p);
      }
    }
    return out;
  }

  double value_of(const std::string& key) const {
    if (std::find(base_keys_.begin(), base_keys_.end(), key) != base_keys_.end()) return 0.0;
    auto it = index_.find(key);
    if (it == index_.end()) return 1.0;
    return h_[it->second];
  }

  void build(std::size_t budget) {
    // Breadth-first enumeration of interior states.
    std::vector<std::string> states;
    std::unordered_map<std::string, std::uint32_t> seen;
    std::vector<std::string> frontier = base_keys_;
    for (const auto& k : base_keys_) seen.emplace(k, std::numeric_limits<std::uint32_t>::max());
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      for (auto& [target, p] : transitions(decode(frontier[head]))) {
        if (seen.contains(target)) continue;
        if (distance_to_base(decode(target)) > radius_) continue;
        if (states.size() >= budget) throw ResourceError("reduced product system exceeds memory budget", states.size() * 2);
        seen.emplace(target, static_cast<std::uint32_t>(states.size()));
        index_.emplace(target, static_cast<std::uint32_t>(states.size()));
        states.push_back(target);
        frontier.push_back(target);
      }
    }
    const auto n = static_cast<int>(states.size());
    h_.assign(states.size(), 0.0);
    if (n == 0) return;
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int row = 0; row < n; ++row) {
      triplets.emplace_back(row, row, 1.0);
      for (auto& [target, p] : transitions(decode(states[static_cast<std::size_t>(row)]))) {
        if (std::find(base_keys_.begin(), base_keys_.end(), target) != base_keys_.end()) continue;
        auto it = index_.find(target);
        if (it == index_.end()) {
          rhs[row] += p;
        } else {
          triplets.emplace_back(row, static_cast<int>(it->second), -p);
        }
      }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw ConvergenceError("sparse LU failed on the reduced product system", 0.0, 0.0);
    Eigen::VectorXd x = lu.solve(rhs);
    for (int i = 0; i < n; ++i) h_[static_cast<std::size_t>(i)] = std::clamp(x[i], 0.0, 1.0);
  }

  Graph g_;
  Graph tree_;
  int radius_;
  int dim_;
  TreeHull hull_;
  std::vector<std::vector<int>> base_coords_;
  std::vector<std::vector<int>> hull_to_base_;
  std::vector<std::string> base_keys_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> h_;
};

int minimal_radius(const Graph& g, const std::vector<Vertex>& base) {
  if (g.kind() == GraphKind::Lattice) return 1;
  // Hull vertices must lie inside B(K, R); half the tree diameter of K bounds that.
  int diameter = 0;
  for (const auto& a : base) {
    for (const auto& b : base) diameter = std::max(diameter, g.distance(a, b));
  }
  return std::max(1, diameter / 2 + 1);
}

struct Ladder {
  int start;
  int step;
  int max_radius;
};

Ladder default_ladder(const Graph& g, const std::vector<Vertex>& base) {
  const int r0 = minimal_radius(g, base);
  switch (g.kind()) {
    case GraphKind::RegularTree:
      return {r0, 1, r0 + 4000};
    case GraphKind::Product:
      return {r0 + 2, 2, r0 + 200};
    case GraphKind::Lattice:
      return {10, 10, 200};
  }
  return {r0, 1, r0 + 100};
}

}  // namespace

double default_tolerance(const Graph& g) {
  switch (g.kind()) {
    case GraphKind::RegularTree:
      return 1e-9;
    case GraphKind::Product:
      return 1e-6;
    case GraphKind::Lattice:
      return 1e-3;
  }
  return 1e-6;
}

double EscapeSolution::escape(const Vertex& x) const { return eval_->escape(x); }
double EscapeSolution::avoid(const Vertex& z) const { return eval_->avoid(z); }

EscapeSolution solve_escape_at_radius(const Graph& g, std::span<const Vertex> base, int radius,
                                      SolverBackend backend, std::size_t budget) {
  EscapeSolution sol;
  sol.base_ = canonical_base(g, base);
  sol.radius_ = radius;
  if (radius < 0) throw ArgumentError("solve radius must be nonnegative");
  if (backend == SolverBackend::Explicit || g.kind() == GraphKind::Lattice) {
    sol.eval_ = std::make_shared<ExplicitEvaluator>(g, sol.base_, radius, budget);
  } else if (g.kind() == GraphKind::RegularTree) {
    sol.eval_ = std::make_shared<TreeEvaluator>(g, sol.base_, radius);
  } else {
    sol.eval_ = std::make_shared<ProductEvaluator>(g, sol.base_, radius, budget);
  }
  sol.ladder_ = {sol.escape(sol.base_.front())};
  return sol;
}

namespace {

class RichardsonEvaluator final : public detail::EscapeEvaluator {
 public:
  using Ptr = std::shared_ptr<const detail::EscapeEvaluator>;
  RichardsonEvaluator(Ptr inner, Ptr outer, int r1, int r2) : inner_(std::move(inner)), outer_(std::move(outer)), r1_(r1), r2_(r2) {}
  double escape(const Vertex& x) const override { return combine(inner_->escape(x), outer_->escape(x)); }
  double avoid(const Vertex& z) const override { return combine(inner_->avoid(z), outer_->avoid(z)); }

 private:
  double combine(double a, double b) const { return std::clamp((r2_ * b - r1_ * a) / (r2_ - r1_), 0.0, 1.0); }
  Ptr inner_, outer_;
  double r1_, r2_;
};

}  // namespace

EscapeSolution solve_escape(const Graph& g, std::span<const Vertex> base, const EscapeOptions& options) {
  const std::vector<Vertex> canon = canonical_base(g, base);
  const double tol = options.tol > 0 ? options.tol : default_tolerance(g);
  Ladder ladder = default_ladder(g, canon);
  if (options.backend == SolverBackend::Explicit) ladder.step = std::max(ladder.step, 1);
  if (options.max_radius > 0) ladder.max_radius = options.max_radius;

  auto probe = [&](const EscapeSolution& s) {
    std::vector<double> values;
    for (const auto& x : s.base()) values.push_back(s.escape(x));
    for (const auto& z : options.watch) values.push_back(s.avoid(z));
    return values;
  };

  EscapeSolution current = solve_escape_at_radius(g, canon, ladder.start, options.backend, options.budget);
  EscapeSolution before;
  std::vector<double> previous = probe(current);
  std::vector<double> history = {previous.front()};
  double gap = std::numeric_limits<double>::infinity();
  for (int r = ladder.start + ladder.step; r <= ladder.max_radius; r += ladder.step) {
    EscapeSolution next = solve_escape_at_radius(g, canon, r, options.backend, options.budget);
    std::vector<double> values = probe(next);
    gap = 0;
    for (std::size_t i = 0; i < values.size(); ++i) gap = std::max(gap, previous[i] - values[i]);
    gap = std::max(gap, 0.0);
    history.push_back(values.front());
    before = std::move(current);
    current = std::move(next);
    previous = std::move(values);
    if (gap < tol) {
      // On transient lattices h_R - h has a c/R tail; remove it from the last two radii.
      if (g.kind() == GraphKind::Lattice && g.transient() && options.backend == SolverBackend::Auto)
        current.eval_ = std::make_shared<RichardsonEvaluator>(before.eval_, current.eval_, before.radius_ + 1,
                                                             current.radius_ + 1);
      current.tail_gap_ = gap;
      current.tol_ = tol;
      current.ladder_ = std::move(history);
      return current;
    }
  }
  throw ConvergenceError("escape solve did not reach tolerance " + std::to_string(tol) + " by radius " +
                             std::to_string(ladder.max_radius),
                         previous.front(), gap);
}

SolveReport escape_probability(const Graph& g, std::span<const Vertex> base, const Vertex& y, double tol) {
  EscapeOptions options;
  options.tol = tol;
  const auto canon = canonical_base(g, base);
  const bool in_base = std::binary_search(canon.begin(), canon.end(), y);
  if (!in_base) options.watch.push_back(y);
  EscapeSolution sol = solve_escape(g, canon, options);
  SolveReport report;
  report.values.emplace(y, in_base ? sol.escape(y) : sol.avoid(y));
  report.radius_used = sol.radius();
  report.tail_gap = sol.tail_gap();
  return report;
}

double green(const Graph& g, const Vertex& x, const Vertex& y, double tol) {
  if (!g.transient()) throw DomainError("Green's function is infinite on recurrent graph " + g.spec());
  EscapeOptions options;
  options.tol = tol;
  if (!(x == y)) options.watch.push_back(x);
  const Vertex base[] = {y};
  EscapeSolution sol = solve_escape(g, base, options);
  const double hit = (x == y) ? 1.0 : 1.0 - sol.avoid(x);
  return hit / sol.escape(y);
}

}  // namespace interlace

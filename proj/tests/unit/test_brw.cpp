#include <doctest.h>

#include <cmath>
#include <map>

#include "interlace/brw.hpp"
#include "interlace/parallel.hpp"
#include "interlace/stats.hpp"

using namespace interlace;

namespace {

// Expected generation sizes from the two-type mean matrix: circles c, bullets b.
std::vector<double> mean_matrix_sizes(double lambda, int n_max) {
  std::vector<double> out;
  double c = lambda, b = 0;
  for (int n = 0; n <= n_max; ++n) {
    out.push_back(c + b);
    const double nc = lambda * (c + b);
    const double nb = 2 * c + b;
    c = nc;
    b = nb;
  }
  return out;
}

// Law of the distance after k steps of simple random walk on the d-regular tree.
std::vector<double> tree_distance_law(int d, int k) {
  std::vector<double> p(static_cast<std::size_t>(k) + 2, 0.0);
  p[0] = 1;
  for (int s = 0; s < k; ++s) {
    std::vector<double> q(p.size(), 0.0);
    for (std::size_t r = 0; r + 1 < p.size(); ++r) {
      if (p[r] == 0) continue;
      if (r == 0) {
        q[1] += p[0];
      } else {
        q[r - 1] += p[r] / d;
        q[r + 1] += p[r] * (d - 1) / d;
      }
    }
    p = q;
  }
  return p;
}

}  // namespace

TEST_CASE("generation recursion") {
  const auto s = expected_generation_sizes(0.1, 3, 20);
  CHECK(s.exact[0] == doctest::Approx(0.9));
  CHECK(s.exact[1] == doctest::Approx(2.61));
  CHECK(s.exact[2] == doctest::Approx(5.769));
  const auto oracle = mean_matrix_sizes(0.9, 20);
  for (int n = 0; n <= 20; ++n) {
    CHECK(s.exact[static_cast<std::size_t>(n)] == doctest::Approx(oracle[static_cast<std::size_t>(n)]).epsilon(1e-12));
    CHECK(s.exact[static_cast<std::size_t>(n)] <= s.envelope[static_cast<std::size_t>(n)] * (1 + 1e-12));
    CHECK(s.exact[static_cast<std::size_t>(n)] <= std::pow(2.8, n) * s.exact[1] * (1 + 1e-12));
  }
  const auto zero = expected_generation_sizes(0.0, 3, 5);
  for (double v : zero.exact) CHECK(v == 0.0);
}

TEST_CASE("brw at zero intensity is empty") {
  const Graph g = Graph::parse("tree:3");
  Rng rng(1);
  const BrwRun run = sample_brw(g, g.origin(), 0.0, 5, 1000, rng);
  CHECK(run.tree.empty());
  for (int n = 0; n <= 5; ++n) CHECK(run.generation_size(n) == 0);
}

TEST_CASE("brw structure and empirical generation sizes") {
  const Graph g = Graph::parse("tree:3");
  const int n_max = 6;
  struct Acc {
    std::vector<MeanStat> sizes = std::vector<MeanStat>(7);
    std::uint64_t bad = 0;
    void merge(const Acc& o) {
      for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i].merge(o.sizes[i]);
      bad += o.bad;
    }
  };
  const Acc acc = run_samples<Acc>(20000, 2, 1, [&](std::size_t, Rng& rng, Acc& a) {
    const BrwRun run = sample_brw(g, g.origin(), 0.1, n_max, 1'000'000, rng);
    a.bad += check_structure(g, run) ? 0 : 1;
    for (int n = 0; n <= n_max; ++n) a.sizes[static_cast<std::size_t>(n)].add(static_cast<double>(run.generation_size(n)));
  });
  CHECK(acc.bad == 0);
  const auto exact = expected_generation_sizes(0.1, 3, n_max).exact;
  for (int n = 0; n <= n_max; ++n) {
    const auto& m = acc.sizes[static_cast<std::size_t>(n)];
    INFO("n=" << n << " mean " << m.mean << " exact " << exact[static_cast<std::size_t>(n)]);
    CHECK(std::abs(m.mean - exact[static_cast<std::size_t>(n)]) < 3 * m.sem());
  }
}

TEST_CASE("offspring table") {
  const Graph g = Graph::parse("tree:3");
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const BrwRun run = sample_brw(g, g.origin(), 0.3, 4, 1'000'000, rng);
    std::vector<int> circle_kids(run.tree.size(), 0), bullet_kids(run.tree.size(), 0);
    for (const auto& node : run.tree) {
      if (node.parent < 0) {
        CHECK(node.generation == 0);
        CHECK(node.type == NodeType::Circle);
        CHECK(run.positions[node.id] == g.origin());
        continue;
      }
      const auto& parent = run.tree[static_cast<std::size_t>(node.parent)];
      CHECK(node.generation == parent.generation + 1);
      CHECK(g.distance(run.positions[node.id], run.positions[parent.id]) == 1);
      (node.type == NodeType::Circle ? circle_kids : bullet_kids)[parent.id] += 1;
    }
    for (const auto& node : run.tree) {
      if (node.generation == run.n_max) continue;
      CHECK(bullet_kids[node.id] == (node.type == NodeType::Circle ? 2 : 1));
    }
  }
}

TEST_CASE("node positions follow the walk law") {
  const Graph g = Graph::parse("tree:3");
  const auto law = tree_distance_law(3, 3);
  std::vector<double> counts(law.size(), 0.0);
  double total = 0;
  Rng rng(4);
  while (total < 20000) {
    const BrwRun run = sample_brw(g, g.origin(), 0.2, 3, 1'000'000, rng);
    for (const auto& node : run.tree) {
      if (node.generation != 3) continue;
      counts[static_cast<std::size_t>(g.distance(g.origin(), run.positions[node.id]))] += 1;
      total += 1;
    }
  }
  // nodes of one tree are dependent, so take a generous chi-square bound (2 dof, only odd distances occur)
  double chi2 = 0;
  for (std::size_t r = 0; r < law.size(); ++r) {
    if (law[r] == 0) {
      CHECK(counts[r] == 0);
      continue;
    }
    const double e = law[r] * total;
    chi2 += (counts[r] - e) * (counts[r] - e) / e;
  }
  INFO("chi2 " << chi2);
  CHECK(chi2 < 40);
}

TEST_CASE("node budget truncates") {
  const Graph g = Graph::parse("tree:3");
  Rng rng(5);
  bool truncated = false;
  for (int t = 0; t < 20 && !truncated; ++t) {
    const BrwRun run = sample_brw(g, g.origin(), 1.0, 30, 500, rng);
    CHECK(run.tree.size() <= 500);
    truncated = run.truncated;
  }
  CHECK(truncated);
}

TEST_CASE("hit probability") {
  const Graph g = Graph::parse("tree:3");
  const Vertex o = g.origin();
  const auto at0 = hit_probability(g, o, o, 0.05, 20, 50000, 6);
  const double expected = 1 - std::exp(-0.45);
  CHECK(std::abs(at0.estimate - expected) < 3 * at0.hits.sigma_at(expected));

  Vertex far = o;
  for (int i = 0; i < 3; ++i) g.step(far, 1);
  CHECK(hit_probability(g, o, far, 0.0, 20, 1000, 7).estimate == 0.0);

  const auto sub = hit_probability(g, o, far, 0.001, 40, 100, 8);
  CHECK(sub.subcritical);
  CHECK(sub.tail_envelope == doctest::Approx(std::pow(2 * std::sqrt(2.0) / 3 * (1 + 2 * 0.009), 40)));
}

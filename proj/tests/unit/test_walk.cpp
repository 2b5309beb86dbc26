#include <doctest.h>

#include <cmath>

#include "interlace/errors.hpp"
#include "interlace/stats.hpp"
#include "interlace/walk.hpp"

using namespace interlace;

TEST_CASE("run_walk leaves a radius-0 region in one step") {
  const Graph g = Graph::parse("tree:3");
  const Ball b = g.ball(g.origin(), 0);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Path p = run_walk(g, g.origin(), b, 100, rng);
    REQUIRE(p.steps.size() == 1);
    CHECK(g.distance(p.start, p.steps[0]) == 1);
    CHECK(p.exit_reason == ExitReason::LeftRegion);
  }
}

TEST_CASE("run_walk respects the step budget and adjacency") {
  const Graph g = Graph::parse("z:3");
  const Ball b = g.ball(g.origin(), 50);
  Rng rng(2);
  const Path p = run_walk(g, g.origin(), b, 30, rng);
  CHECK(p.steps.size() == 30);
  CHECK(p.exit_reason == ExitReason::StepBudget);
  Vertex prev = p.start;
  for (const auto& v : p.steps) {
    CHECK(g.distance(prev, v) == 1);
    prev = v;
  }
}

TEST_CASE("exit side of a 1d interval is fair") {
  const Graph g = Graph::parse("z:1");
  const Ball b = g.ball(g.origin(), 1);
  Frequency plus;
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const Path p = run_walk(g, g.origin(), b, 1 << 20, rng);
    plus.add(g.coords(p.steps.back())[0] > 0);
  }
  CHECK(std::abs(plus.estimate() - 0.5) < 3 * plus.sigma_at(0.5));
}

TEST_CASE("return probability to the tree root") {
  const Graph g = Graph::parse("tree:3");
  const Ball b = g.ball(g.origin(), 12);
  Frequency back;
  Rng rng(4);
  for (int i = 0; i < 20000; ++i) {
    const Path p = run_walk(g, g.origin(), b, 1 << 20, rng);
    bool returned = false;
    for (const auto& v : p.steps) returned = returned || v == g.origin();
    back.add(returned);
  }
  // leaving radius 12 without returning is within 2^-11 of never returning
  CHECK(std::abs(back.estimate() - 0.5) < 3 * back.sigma_at(0.5));
}

TEST_CASE("escape probabilities") {
  const Graph t3 = Graph::parse("tree:3");
  const Vertex o = t3.origin();
  const auto r = escape_probability(t3, std::span(&o, 1), o, 1e-9);
  CHECK(r.values.at(o) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.tail_gap >= 0);

  const Graph t5 = Graph::parse("tree:5");
  const Vertex o5 = t5.origin();
  CHECK(escape_probability(t5, std::span(&o5, 1), o5, 1e-9).values.at(o5) == doctest::Approx(0.75).epsilon(1e-8));

  const Graph z3 = Graph::parse("z:3");
  const Vertex z = z3.origin();
  const auto l = escape_probability(z3, std::span(&z, 1), z, 1e-3);
  CHECK(std::abs(l.values.at(z) - 0.659463) < 1e-3);
}

TEST_CASE("escape on a recurrent lattice shrinks toward zero") {
  const Graph z1 = Graph::parse("z:1");
  const Vertex o = z1.origin();
  const auto s10 = solve_escape_at_radius(z1, std::span(&o, 1), 10);
  const auto s100 = solve_escape_at_radius(z1, std::span(&o, 1), 100);
  CHECK(s100.escape(o) < s10.escape(o));
  CHECK(s100.escape(o) < 0.011);
  CHECK_THROWS_AS(green(z1, o, o, 1e-3), DomainError);
}

TEST_CASE("radius ladder is nonincreasing") {
  for (const char* spec : {"tree:3", "treez:3x1", "z:3"}) {
    const Graph g = Graph::parse(spec);
    const Vertex o = g.origin();
    const auto s = solve_escape(g, std::span(&o, 1));
    const auto& ladder = s.ladder();
    REQUIRE(ladder.size() >= 2);
    for (std::size_t i = 1; i < ladder.size(); ++i) CHECK(ladder[i] <= ladder[i - 1] + 1e-12);
  }
}

TEST_CASE("reduced solver agrees with the explicit solve") {
  for (const char* spec : {"tree:3", "tree:4", "treez:3x1"}) {
    const Graph g = Graph::parse(spec);
    const Vertex o = g.origin();
    const std::vector<Vertex> base{o, g.neighbor(o, 1)};
    const int radius = 6;
    const auto reduced = solve_escape_at_radius(g, base, radius, SolverBackend::Auto);
    const auto explicit_ = solve_escape_at_radius(g, base, radius, SolverBackend::Explicit);
    for (const auto& x : base) CHECK(reduced.escape(x) == doctest::Approx(explicit_.escape(x)).epsilon(1e-9));
    Vertex far = g.neighbor(g.neighbor(g.neighbor(o, 1), 1), 1);
    CHECK(reduced.avoid(far) == doctest::Approx(explicit_.avoid(far)).epsilon(1e-9));
  }
}

TEST_CASE("green function on the tree") {
  const Graph g = Graph::parse("tree:3");
  const Vertex o = g.origin();
  CHECK(green(g, o, o, 1e-9) == doctest::Approx(2.0).epsilon(1e-8));
  Vertex y = o;
  for (int k = 1; k <= 5; ++k) {
    g.step(y, 1);
    CHECK(green(g, o, y, 1e-9) == doctest::Approx(2.0 * std::pow(0.5, k)).epsilon(1e-7));
  }
}

TEST_CASE("green function is symmetric and positive") {
  Rng rng(8);
  for (const char* spec : {"tree:3", "treez:3x1", "z:3"}) {
    const Graph g = Graph::parse(spec);
    const int pairs = g.kind() == GraphKind::Lattice ? 1 : 6;
    for (int t = 0; t < pairs; ++t) {
      Vertex a = g.origin(), b = g.origin();
      for (int s = 0; s < 3; ++s) g.step(a, static_cast<int>(rng.below(static_cast<std::uint32_t>(g.degree()))));
      for (int s = 0; s < 3; ++s) g.step(b, static_cast<int>(rng.below(static_cast<std::uint32_t>(g.degree()))));
      const double tol = g.kind() == GraphKind::Lattice ? 1e-3 : 1e-7;
      const double ab = green(g, a, b, tol);
      const double ba = green(g, b, a, tol);
      CHECK(ab > 0);
      CHECK(std::abs(ab - ba) < 4 * tol * std::max(1.0, ab));
    }
  }
}

TEST_CASE("spectral radius closed forms") {
  CHECK(spectral_radius_closed_form(Graph::parse("tree:3")) == doctest::Approx(2 * std::sqrt(2.0) / 3));
  CHECK(spectral_radius_closed_form(Graph::parse("z:3")) == 1.0);
  CHECK(spectral_radius_closed_form(Graph::parse("treez:3x1")) == doctest::Approx((2 * std::sqrt(2.0) + 2) / 5));
}

TEST_CASE("power estimate of the spectral radius") {
  const Graph t3 = Graph::parse("tree:3");
  const auto est = spectral_radius(t3, 200, SpectralMode::PowerEstimate);
  CHECK(std::abs(est.value / spectral_radius_closed_form(t3) - 1) < 0.02);
  CHECK(est.max_mass_defect <= 1e-12);
  CHECK(est.raw_root < spectral_radius_closed_form(t3));
  // decay bound p^(2n)(o,o)^(1/2n) <= rho
  for (std::size_t k = 2; k < est.returns.size(); k += 2) {
    CHECK(std::log(est.returns[k]) / static_cast<double>(k) <= std::log(spectral_radius_closed_form(t3)) + 1e-12);
  }

  const Graph p = Graph::parse("treez:3x1");
  const auto pe = spectral_radius(p, 200, SpectralMode::PowerEstimate);
  CHECK(std::abs(spectral_radius_closed_form(p) / pe.value - 1) < 0.02);
  CHECK(pe.max_mass_defect <= 1e-12);

  const auto ze = spectral_radius(Graph::parse("z:3"), 60, SpectralMode::PowerEstimate);
  CHECK(ze.value > 0.9);
  CHECK(ze.value <= 1.0 + 1e-9);
}

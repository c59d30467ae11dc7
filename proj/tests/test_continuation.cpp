#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringnls/continuation.hpp"
#include "ringnls/errors.hpp"
#include "ringnls/solver.hpp"

using namespace ringnls;

namespace {
constexpr double kPi = std::numbers::pi;

bool has_family(const Branch& b, SolutionFamily f) {
  return std::find(b.family_history.begin(), b.family_history.end(), f) != b.family_history.end();
}

SweepSpec t_sweep(double g, double v, double t0, double t1) {
  SweepSpec spec;
  spec.axis = SweepAxis::t;
  spec.start = t0;
  spec.end = t1;
  spec.g = g;
  spec.v = v;
  return spec;
}
}  // namespace

TEST_CASE("chart round trip") {
  for (double x : {-7.0, -0.3, 0.2, 1.0, 12.0}) {
    for (SweepAxis a : {SweepAxis::g, SweepAxis::t, SweepAxis::v}) {
      CHECK(from_chart(a, to_chart(a, x)) == doctest::Approx(x).epsilon(1e-13));
    }
  }
}

TEST_CASE("uniform branch along g is the line E = g/L") {
  SweepSpec spec;
  spec.axis = SweepAxis::g;
  spec.start = 0.0;
  spec.end = -8.0;
  spec.seeds = {constant_state(DefectParams(1.0, 0.0), 0.0)};
  const Branch b = continue_branch(spec.seeds.front(), spec);
  CHECK(b.termination == Termination::range_end);
  double prev = INFINITY;
  for (const auto& p : b.points) {
    CHECK(std::abs(p.state.energy - p.state.g / kTwoPi) < 1e-10);
    CHECK(p.state.energy < prev);
    prev = p.state.energy;
  }
  CHECK(b.points.back().state.g == -8.0);
}

TEST_CASE("levels follow from the linear spectrum") {
  const auto lv = levels_at(DefectParams(1.0, 0.0), 5.0, 4);
  REQUIRE(lv.size() == 4);
  CHECK(lv[0].energy == doctest::Approx(5.0 / kTwoPi).epsilon(1e-10));
  for (std::size_t i = 1; i < lv.size(); ++i) CHECK(lv[i].energy >= lv[i - 1].energy);
  for (const auto& s : lv) CHECK(residual_norm(s, SolveConfig{}.quadrature) < 1e-9);
}

TEST_CASE("scaling family keeps the residual small") {
  const auto lv = levels_at(DefectParams(1.0, 0.0), -3.0, 3);
  for (const auto& s : lv) {
    for (int n : {2, 3}) {
      const StationaryState m = scaling_family(s, n);
      CHECK(m.g == doctest::Approx(n * n * s.g));
      CHECK(m.energy == doctest::Approx(n * n * s.energy));
      CHECK(residual_norm(m, SolveConfig{}.quadrature) < 1e-8);
    }
  }
  CHECK_THROWS_AS(scaling_family(levels_at(DefectParams(2.0, 0.0), 1.0, 1).front(), 2), DomainError);
}

TEST_CASE("ground level disappears at c = E^2/4g for g = 5, v = 1") {
  SweepSpec spec = t_sweep(5.0, 1.0, 0.5, 3.0);
  const auto lv = levels_at(DefectParams(0.5, 1.0), 5.0, 1);
  const Branch b = continue_branch(lv.front(), spec);
  REQUIRE(b.termination == Termination::disappeared_at_admissibility_boundary);
  const auto& s = b.points.back().state;
  const double q = s.energy * s.energy / (4.0 * s.g);
  CHECK(std::abs(s.c - q) <= 1e-6 * q);
}

TEST_CASE("dn ring closes at g = -5, v = 0.3") {
  const double t0 = std::tan(0.75);
  const DefectParams d(t0, 0.3);
  const auto seeds = family_census(d, -5.0, SolutionFamily::DnBounded_NegG_NegE, {-0.8, -1.0, -1.3, -1.6});
  SweepSpec spec = t_sweep(-5.0, 0.3, t0, std::tan(0.5 * (kPi - 1e-3)));
  spec.initial_step = 0.02;
  int closed = 0;
  for (const auto& s : seeds) {
    const Branch b = continue_branch(s, spec);
    if (b.termination != Termination::closed_loop) continue;
    ++closed;
    CHECK(has_family(b, SolutionFamily::DnBounded_NegG_NegE));
    const auto& first = b.points.front().state;
    const auto& last = b.points.back().state;
    CHECK(std::abs(first.energy - last.energy) <= 1e-6 * (1.0 + std::abs(first.energy)));
    CHECK(std::abs(first.c - last.c) <= 1e-6 * (1.0 + std::abs(first.c)));
  }
  CHECK(closed >= 1);
}

TEST_CASE("Berry sign around the degeneracy and off it") {
  auto sign_at = [](double tc, double vc, double g, int level, int n) {
    const double s0 = 2.0 * std::atan(tc) + 0.2;
    const auto lv = levels_at(DefectParams(std::tan(0.5 * s0), vc), g, level + 1);
    return berry_loop({tc, vc}, 0.2, g, lv.at(level), n).sign_factor;
  };
  CHECK(sign_at(1.0, 0.0, 5.0, 1, 64) == -1);
  CHECK(sign_at(-1.0, 0.0, 0.0, 1, 64) == -1);
  CHECK(sign_at(3.0, 1.5, 5.0, 0, 64) == 1);
  const auto lv = levels_at(DefectParams(std::tan(0.5 * 0.2), 0.0), 0.0, 1);
  CHECK_THROWS_AS(berry_loop({0.0, 0.0}, 0.2, 0.0, lv.front(), 32), DomainError);
}

TEST_CASE("exotic cycle of the linear ring") {
  const HolonomyReport r = exotic_cycle(1.0, 1000.0, 0.0, 6);
  CHECK(r.loop_kind == LoopKind::exotic_v_cycle);
  CHECK(r.dirichlet_limit_ok);
  CHECK(r.permutation.at(0) == 1);
  CHECK(r.permutation.at(1) == 3);
  CHECK(r.permutation.at(2) == 2);
  CHECK(r.shifted_levels == std::vector<int>{0, 1, 3});

  ExoticOptions back;
  back.round_trip = true;
  const HolonomyReport id = exotic_cycle(1.0, 1000.0, 0.0, 6, back);
  for (const auto& [from, to] : id.permutation) CHECK(from == to);
  CHECK(id.shifted_levels.empty());

  CHECK_THROWS_AS(exotic_cycle(1.0, 10.0, 0.0, 4), DomainError);
}

TEST_CASE("Dirichlet spectrum") {
  const auto d = dirichlet_spectrum(0.0, 4);
  for (int j = 0; j < 4; ++j) CHECK(d[j] == doctest::Approx(0.25 * (j + 1) * (j + 1)).epsilon(1e-9));
  const auto n = dirichlet_spectrum(5.0, 3);
  for (std::size_t j = 1; j < n.size(); ++j) CHECK(n[j] > n[j - 1]);
  CHECK(n[0] > d[0]);
}

TEST_CASE("crossing at t = 1 for v = 0, none for a single branch") {
  SweepSpec spec = t_sweep(0.0, 0.0, 0.5, 3.0);
  spec.seeds = levels_at(DefectParams(0.5, 0.0), 0.0, 3);
  const auto branches = sweep(spec);
  const auto deg = detect_degeneracies(branches, 1e-8);
  const bool found = std::any_of(deg.begin(), deg.end(), [](const Degeneracy& d) {
    return d.crossing && std::abs(d.axis_value - 1.0) < 1e-6 && std::abs(d.gap) < 1e-8;
  });
  CHECK(found);
  CHECK(detect_degeneracies({branches.front()}, 1e-8).empty());
  CHECK(detect_degeneracies({}, 1e-8).empty());
}

TEST_CASE("avoided crossing for v = 1") {
  SweepSpec spec = t_sweep(0.0, 1.0, 0.5, 3.0);
  spec.seeds = levels_at(DefectParams(0.5, 1.0), 0.0, 3);
  const auto deg = detect_degeneracies(sweep(spec), 1e-8);
  CHECK(std::any_of(deg.begin(), deg.end(), [](const Degeneracy& d) { return !d.crossing && d.gap > 1e-3; }));
  CHECK(std::none_of(deg.begin(), deg.end(), [](const Degeneracy& d) { return d.crossing; }));
}

TEST_CASE("sweep validation") {
  SweepSpec spec = t_sweep(0.0, 0.0, 0.5, 0.5);
  spec.seeds = levels_at(DefectParams(0.5, 0.0), 0.0, 1);
  CHECK_THROWS_AS(sweep(spec), DomainError);
  spec.end = 2.0;
  spec.min_step = 0.0;
  CHECK_THROWS_AS(sweep(spec), DomainError);
}

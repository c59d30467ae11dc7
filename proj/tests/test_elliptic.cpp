#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ringnls/elliptic.hpp"
#include "ringnls/errors.hpp"

using namespace ringnls;
using ringnls::elliptic::jacobi;

TEST_CASE("jacobi degenerate arguments") {
  const auto zero = jacobi(0.0, 0.5);
  CHECK(zero.sn == 0.0);
  CHECK(zero.cn == 1.0);
  CHECK(zero.dn == 1.0);

  const auto circ = jacobi(1.0, 0.0);
  CHECK(circ.sn == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(circ.cn == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
  CHECK(circ.dn == 1.0);

  const auto hyp = jacobi(1.0, 1.0);
  CHECK(hyp.sn == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(hyp.cn == doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-15));
  CHECK(hyp.dn == doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-15));
}

TEST_CASE("jacobi at (0.7, 0.36) against the ODE oracle") {
  // Frozen from the RK4 oracle below (and an independent 25-digit evaluation).
  constexpr double sn_ref = 0.62991711532348678;
  constexpr double cn_ref = 0.77666236410845676;
  constexpr double dn_ref = 0.92582589832868326;
  const auto ode = oracle::jacobi_by_ode(0.7, 0.36);
  CHECK(std::abs(ode[0] - sn_ref) < 1e-12);
  CHECK(std::abs(oracle::sn_by_second_order_ode(0.7, 0.36) - sn_ref) < 1e-12);

  const auto e = jacobi(0.7, 0.36);
  CHECK(std::abs(e.sn - sn_ref) < 1e-14);
  CHECK(std::abs(e.cn - cn_ref) < 1e-14);
  CHECK(std::abs(e.dn - dn_ref) < 1e-14);
}

TEST_CASE("negative and reciprocal parameters agree with the ODE oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> udist(-4.0, 4.0);
  std::uniform_real_distribution<double> mdist(-6.0, 0.0);
  for (int i = 0; i < 40; ++i) {
    const double u = udist(rng);
    const double m = mdist(rng);
    const auto ref = oracle::jacobi_by_ode(u, m);
    const auto e = jacobi(u, m);
    CHECK(std::abs(e.sn - ref[0]) < 1e-9);
    CHECK(std::abs(e.cn - ref[1]) < 1e-9);
    CHECK(std::abs(e.dn - ref[2]) < 1e-9);
  }
  // m > 1: sn is bounded by 1/sqrt(m) and the defining system still holds.
  for (double m : {1.5, 3.0, 10.0}) {
    for (double u : {-0.9, 0.3, 0.55}) {
      const auto ref = oracle::jacobi_by_ode(u, m);
      const auto e = jacobi(u, m);
      CHECK(std::abs(e.sn - ref[0]) < 1e-9);
      CHECK(std::abs(e.cn - ref[1]) < 1e-9);
      CHECK(std::abs(e.dn - ref[2]) < 1e-9);
    }
  }
  // 25-digit reference for m = -2.5.
  const auto neg = jacobi(1.3, -2.5);
  CHECK(std::abs(neg.sn - 0.94580335996469287) < 1e-13);
  CHECK(std::abs(neg.cn + 0.32473990250583252) < 1e-13);
  CHECK(std::abs(neg.dn - 1.7989886017707994) < 1e-13);
}

TEST_CASE("identities, periodicity and parity over random points") {
  std::mt19937_64 rng(20241016);
  std::uniform_real_distribution<double> udist(-10.0, 10.0);
  std::uniform_real_distribution<double> mdist(0.0, 1.0);
  const elliptic::Tolerances tol;
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = udist(rng);
    const double m = mdist(rng);
    const auto e = jacobi(u, m);
    if (std::abs(e.sn * e.sn + e.cn * e.cn - 1.0) > tol.identity) ++failures;
    if (std::abs(e.dn * e.dn + m * e.sn * e.sn - 1.0) > tol.identity) ++failures;
    const auto r = jacobi(-u, m);
    if (r.sn != -e.sn || r.cn != e.cn || r.dn != e.dn) ++failures;
    if (m <= 0.99) {
      const double shifted = jacobi(u + 4.0 * elliptic::complete_K(m), m).sn;
      if (std::abs(shifted - e.sn) > 1e-10) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("complete_K") {
  CHECK(elliptic::complete_K(0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-16));
  const double quad = oracle::adaptive_simpson(
      [](double th) { return 1.0 / std::sqrt(1.0 - 0.5 * std::sin(th) * std::sin(th)); }, 0.0,
      std::numbers::pi / 2);
  CHECK(std::abs(quad - 1.8540746773013719) < 1e-12);
  CHECK(std::abs(elliptic::complete_K(0.5) - quad) < 1e-12);
  CHECK_THROWS_AS(elliptic::complete_K(1.0), DomainError);
  CHECK_THROWS_AS(elliptic::complete_K(1.0 - 1e-16), DomainError);
  CHECK_NOTHROW(elliptic::complete_K(1.0 - 1e-12));
  CHECK(elliptic::complete_K(1.0 - 1e-12) > 10.0);
}

TEST_CASE("incomplete integrals") {
  CHECK(elliptic::incomplete_E(0.0, 0.4) == 0.0);
  CHECK(elliptic::incomplete_E(1.7, 0.0) == 1.7);
  const double quad = oracle::adaptive_simpson(
      [](double t) {
        const double dn = jacobi(t, 0.3).dn;
        return dn * dn;
      },
      0.0, 1.2);
  CHECK(std::abs(quad - 1.0763509967730942) < 1e-11);
  CHECK(std::abs(elliptic::incomplete_E(1.2, 0.3) - quad) < 1e-11);
  // Beyond one period the quasi-periodic extension must keep agreeing.
  const double quad_long = oracle::adaptive_simpson(
      [](double t) {
        const double dn = jacobi(t, 0.8).dn;
        return dn * dn;
      },
      0.0, 9.5);
  CHECK(std::abs(elliptic::incomplete_E(9.5, 0.8) - quad_long) < 1e-10);
  CHECK_THROWS_AS(elliptic::incomplete_E(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(elliptic::incomplete_E(1.0, -0.1), DomainError);

  // F inverts the amplitude for m in [0,1) and for negative m.
  for (double m : {-3.0, -0.5, 0.2, 0.9, 0.999}) {
    for (double u : {-5.0, -0.4, 0.8, 3.3}) {
      if (m >= 0.0) {
        CHECK(std::abs(elliptic::incomplete_F(elliptic::amplitude(u, m), m) - u) < 1e-11);
      }
      const auto e = jacobi(u, m);
      // on the principal branch phi = atan2(sn, cn)
      if (e.cn > 0.0 && std::abs(u) < elliptic::complete_K(m)) {
        CHECK(std::abs(elliptic::incomplete_F(std::atan2(e.sn, e.cn), m) - u) < 1e-11);
      }
    }
  }
}

TEST_CASE("non-finite input is a domain error") {
  CHECK_THROWS_AS(jacobi(std::nan(""), 0.3), DomainError);
  CHECK_THROWS_AS(jacobi(0.3, INFINITY), DomainError);
}

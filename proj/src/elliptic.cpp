#include "ringnls/elliptic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ringnls/errors.hpp"

namespace ringnls::elliptic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 2.220446049250313e-16;
constexpr int kMaxAgmSteps = 64;

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be finite, got " << value;
    throw DomainError(msg.str());
  }
}

// Arithmetic-geometric mean ladder started from (1, sqrt(m1), sqrt(m)),
// m1 = 1 - m.
struct AgmLadder {
  std::array<double, kMaxAgmSteps> a{};
  std::array<double, kMaxAgmSteps> c{};
  int steps = 0;  // index of the last rung
};

AgmLadder agm_ladder(double m, double m1) {
  AgmLadder ladder;
  double a = 1.0;
  double b = std::sqrt(m1);
  double c = std::sqrt(m);
  ladder.a[0] = a;
  ladder.c[0] = c;
  int n = 0;
  while (std::abs(c) > kEps * a && n + 1 < kMaxAgmSteps) {
    const double an = 0.5 * (a + b);
    c = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = an;
    ++n;
    ladder.a[n] = a;
    ladder.c[n] = c;
  }
  ladder.steps = n;
  return ladder;
}

double agm(double a, double b) {
  for (int i = 0; i < kMaxAgmSteps && std::abs(a - b) > kEps * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return a;
}

// Descending Landen from the ladder; accurate where the phase is far from
// pi/2, i.e. for |u| up to about K/2.
EllipticTriple jacobi_landen(double u, double m, double m1, const AgmLadder& ladder) {
  const int n = ladder.steps;
  double phi = std::ldexp(ladder.a[n] * u, n);
  for (int i = n; i >= 1; --i) {
    phi = 0.5 * (phi + std::asin(ladder.c[i] / ladder.a[i] * std::sin(phi)));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  // (1 - m) + m cn^2 is a sum of non-negative terms, unlike 1 - m sn^2.
  const double dn = std::sqrt(m1 + m * cn * cn);
  return {sn, cn, dn};
}

// Ascending (Gauss) transformation for m near 1, |u| <= K/2: each step
// squares the complementary parameter, m1' = ((1 - k)/(1 + k))^2, until
// tanh/sech are exact, then maps back. Unlike the descending scheme it never
// takes asin of arguments near 1, so cn and dn keep relative precision.
EllipticTriple jacobi_gauss(double u, double m1) {
  std::array<double, kMaxAgmSteps> s1{};
  int n = 0;
  double v = u;
  double mc = m1;
  while (mc > 0.0 && std::log(mc) + 2.0 * std::abs(v) > std::log(4e-17) && n < kMaxAgmSteps) {
    const double k = std::sqrt(1.0 - mc);
    const double r = mc / ((1.0 + k) * (1.0 + k));  // (1 - k)/(1 + k)
    s1[n++] = r;
    v /= 1.0 + r;
    mc = r * r;
  }
  const double sech = 1.0 / std::cosh(v);
  double sn = std::tanh(v);
  double cn = sech;
  double dn = sech;
  for (int i = n - 1; i >= 0; --i) {
    const double r = s1[i];
    const double mu = 1.0 - r * r;
    const double d2 = dn * dn;
    const double sn_i = (1.0 + r) * sn * cn / dn;
    const double cn_i = (1.0 + r) / mu * (d2 - r) / dn;
    const double dn_i = (1.0 - r) / mu * (d2 + r) / dn;
    sn = sn_i;
    cn = cn_i;
    dn = dn_i;
  }
  return {sn, cn, dn};
}

// m in (0, 1), m1 = 1 - m.
EllipticTriple jacobi_unit(double u, double m, double m1) {
  const AgmLadder ladder = agm_ladder(m, m1);
  const double quarter_period = kPi / (2.0 * ladder.a[ladder.steps]);
  // Reduce to [0, K] with the period 4K, parity and sn(2K - w) = sn(w),
  // cn(2K - w) = -cn(w).
  const double period = 4.0 * quarter_period;
  if (std::abs(u) > 0.5 * period) u -= period * std::nearbyint(u / period);
  const double s_sign = u < 0.0 ? -1.0 : 1.0;
  double w = std::abs(u);
  double c_sign = 1.0;
  if (w > quarter_period) {
    w = 2.0 * quarter_period - w;
    c_sign = -1.0;
  }
  auto half = [&](double x) { return m1 < 1e-4 ? jacobi_gauss(x, m1) : jacobi_landen(x, m, m1, ladder); };
  if (w <= 0.5 * quarter_period) {
    const EllipticTriple e = half(w);
    return {s_sign * e.sn, c_sign * e.cn, e.dn};
  }
  // Near K, cn -> 0: shift by K so that cn keeps its relative precision,
  // cn(K - v) = k' sn(v)/dn(v), sn(K - v) = cn(v)/dn(v), dn(K - v) = k'/dn(v).
  const EllipticTriple e = half(quarter_period - w);
  const double kp = std::sqrt(m1);
  return {s_sign * e.cn / e.dn, c_sign * kp * e.sn / e.dn, kp / e.dn};
}

}  // namespace

EllipticTriple jacobi(double u, double m) {
  require_finite(u, "jacobi: argument u");
  require_finite(m, "jacobi: parameter m");
  if (u == 0.0) return {0.0, 1.0, 1.0};
  if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
  if (m == 1.0) {
    const double sech = 1.0 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }
  if (m < 0.0) {
    // sn(u|-mu) = sd(u'|m')/sqrt(1+mu), cn = cd(u'|m'), dn = nd(u'|m'),
    // with u' = sqrt(1+mu) u and m' = mu/(1+mu).
    const double mu = -m;
    const double scale = std::sqrt(1.0 + mu);
    const EllipticTriple p = jacobi(u * scale, mu / (1.0 + mu));
    return {p.sn / (scale * p.dn), p.cn / p.dn, 1.0 / p.dn};
  }
  if (m > 1.0) {
    // Reciprocal parameter: sn(u|m) = sn(sqrt(m) u|1/m)/sqrt(m).
    const double k = std::sqrt(m);
    const EllipticTriple p = jacobi(u * k, 1.0 / m);
    return {p.sn / k, p.dn, p.cn};
  }
  return jacobi_unit(u, m, 1.0 - m);
}

EllipticTriple jacobi(double u, double m, double m1) {
  require_finite(u, "jacobi: argument u");
  if (!(m >= 0.0 && m1 >= 0.0 && std::abs(m + m1 - 1.0) <= 1e-12)) {
    throw DomainError("jacobi: need m, m1 >= 0 with m + m1 = 1");
  }
  if (u == 0.0) return {0.0, 1.0, 1.0};
  if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
  if (m1 == 0.0) {
    const double sech = 1.0 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }
  return jacobi_unit(u, m, m1);
}

double amplitude(double u, double m) {
  require_finite(u, "amplitude: argument u");
  if (!(m >= 0.0 && m < 1.0)) throw DomainError("amplitude: m must lie in [0, 1)");
  if (m == 0.0) return u;
  const double two_k = 2.0 * complete_K(m);
  const double j = std::nearbyint(u / two_k);
  const EllipticTriple e = jacobi(u - j * two_k, m);
  // On [-K, K] cn >= 0, so atan2 lands in [-pi/2, pi/2].
  return std::atan2(e.sn, e.cn) + j * kPi;
}

double complete_K(double m) {
  require_finite(m, "complete_K: parameter m");
  if (m >= 1.0 - 1e-15) {
    std::ostringstream msg;
    msg << "complete_K: m = " << m << " too close to or above 1 (period diverges)";
    throw DomainError(msg.str());
  }
  return kPi / (2.0 * agm(1.0, std::sqrt(1.0 - m)));
}

double complete_K(double m, double m1) {
  if (!(m >= 0.0 && m1 > 0.0 && std::abs(m + m1 - 1.0) <= 1e-12)) {
    throw DomainError("complete_K: need m >= 0, m1 > 0 with m + m1 = 1");
  }
  return kPi / (2.0 * agm(1.0, std::sqrt(m1)));
}

double complete_E(double m) {
  require_finite(m, "complete_E: parameter m");
  if (m > 1.0) throw DomainError("complete_E: m must not exceed 1");
  if (m == 1.0) return 1.0;
  return carlson_rf(0.0, 1.0 - m, 1.0) - m / 3.0 * carlson_rd(0.0, 1.0 - m, 1.0);
}

double incomplete_F(double phi, double m) {
  require_finite(phi, "incomplete_F: amplitude phi");
  require_finite(m, "incomplete_F: parameter m");
  const double j = std::nearbyint(phi / kPi);
  const double r = phi - j * kPi;
  const double s = std::sin(r);
  const double c = std::cos(r);
  // m = 1 is finite (artanh of sin phi) away from the quarter-period poles.
  if (m > 1.0 || (m == 1.0 && (j != 0.0 || c == 0.0))) {
    throw DomainError("incomplete_F: m must be < 1 (or 1 with |phi| < pi/2)");
  }
  double value = s * carlson_rf(c * c, 1.0 - m * s * s, 1.0);
  if (j != 0.0) value += 2.0 * j * complete_K(m);
  return value;
}

double incomplete_E(double u, double m) {
  require_finite(u, "incomplete_E: argument u");
  require_finite(m, "incomplete_E: parameter m");
  if (!(m >= 0.0 && m < 1.0)) throw DomainError("incomplete_E: m must lie in [0, 1)");
  if (u == 0.0) return 0.0;
  if (m == 0.0) return u;
  // dn^2 has period 2K and integrates to 2E(m) over one period.
  const double two_k = 2.0 * complete_K(m);
  const double j = std::nearbyint(u / two_k);
  const EllipticTriple e = jacobi(u - j * two_k, m);
  const double s = e.sn;
  const double c = e.cn;
  const double y = 1.0 - m * s * s;
  double value = s * carlson_rf(c * c, y, 1.0) - m / 3.0 * s * s * s * carlson_rd(c * c, y, 1.0);
  if (j != 0.0) value += 2.0 * j * complete_E(m);
  return value;
}

double carlson_rf(double x, double y, double z) {
  if (std::min({x, y, z}) < 0.0 || std::min({x + y, y + z, z + x}) <= 0.0) {
    throw DomainError("carlson_rf: arguments must be non-negative with at most one zero");
  }
  for (int i = 0; i < 100; ++i) {
    const double avg = (x + y + z) / 3.0;
    const double dx = (avg - x) / avg;
    const double dy = (avg - y) / avg;
    const double dz = (avg - z) / avg;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < 1e-3) {
      const double e2 = dx * dy - dz * dz;
      const double e3 = dx * dy * dz;
      return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / std::sqrt(avg);
    }
    const double sx = std::sqrt(x);
    const double sy = std::sqrt(y);
    const double sz = std::sqrt(z);
    const double lambda = sx * (sy + sz) + sy * sz;
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
  }
  throw NumericalError("carlson_rf: duplication did not converge");
}

double carlson_rd(double x, double y, double z) {
  if (std::min(x, y) < 0.0 || x + y <= 0.0 || z <= 0.0) {
    throw DomainError("carlson_rd: requires x, y >= 0 (not both zero) and z > 0");
  }
  constexpr double c1 = 3.0 / 14.0;
  constexpr double c2 = 1.0 / 6.0;
  constexpr double c3 = 9.0 / 22.0;
  constexpr double c4 = 3.0 / 26.0;
  constexpr double c5 = 0.25 * c3;
  constexpr double c6 = 1.5 * c4;
  double sum = 0.0;
  double fac = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double avg = 0.2 * (x + y + 3.0 * z);
    const double dx = (avg - x) / avg;
    const double dy = (avg - y) / avg;
    const double dz = (avg - z) / avg;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < 1e-3) {
      const double ea = dx * dy;
      const double eb = dz * dz;
      const double ec = ea - eb;
      const double ed = ea - 6.0 * eb;
      const double ee = ed + ec + ec;
      return 3.0 * sum +
             fac * (1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee) + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea))) /
                 (avg * std::sqrt(avg));
    }
    const double sx = std::sqrt(x);
    const double sy = std::sqrt(y);
    const double sz = std::sqrt(z);
    const double lambda = sx * (sy + sz) + sy * sz;
    sum += fac / (sz * (z + lambda));
    fac *= 0.25;
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
  }
  throw NumericalError("carlson_rd: duplication did not converge");
}

}  // namespace ringnls::elliptic

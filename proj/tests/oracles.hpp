#pragma once

// Independent reference computations used only by the test suites.
// Nothing in here calls into the library's elliptic or quadrature code.

#include <array>
#include <cmath>
#include <functional>

namespace ringnls::oracle {

/// RK4 integration of the defining system s' = c d, c' = -s d, d' = -m s c
/// from (0, 1, 1); valid for every real m.
inline std::array<double, 3> jacobi_by_ode(double u, double m, int steps = 20000) {
  std::array<double, 3> y{0.0, 1.0, 1.0};
  const double h = u / steps;
  auto f = [m](const std::array<double, 3>& s) {
    return std::array<double, 3>{s[1] * s[2], -s[0] * s[2], -m * s[0] * s[1]};
  };
  for (int i = 0; i < steps; ++i) {
    const auto k1 = f(y);
    std::array<double, 3> tmp{};
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    const auto k2 = f(tmp);
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    const auto k3 = f(tmp);
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h * k3[j];
    const auto k4 = f(tmp);
    for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return y;
}

/// sn from the scalar second-order ODE sn'' = -(1+m) sn + 2m sn^3, sn(0)=0, sn'(0)=1.
inline double sn_by_second_order_ode(double u, double m, int steps = 20000) {
  double y = 0.0;
  double p = 1.0;
  const double h = u / steps;
  auto acc = [m](double s) { return -(1.0 + m) * s + 2.0 * m * s * s * s; };
  for (int i = 0; i < steps; ++i) {
    const double k1y = p, k1p = acc(y);
    const double k2y = p + 0.5 * h * k1p, k2p = acc(y + 0.5 * h * k1y);
    const double k3y = p + 0.5 * h * k2p, k3p = acc(y + 0.5 * h * k2y);
    const double k4y = p + h * k3p, k4p = acc(y + h * k3y);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
  }
  return y;
}

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                               int max_depth = 40) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// RK4 for psi'' = g psi^3 - E psi; returns (psi(x), psi'(x)) at x = length.
inline std::array<double, 2> nls_by_rk4(double g, double energy, double psi0, double dpsi0, double length,
                                        int steps = 8192) {
  double y = psi0;
  double p = dpsi0;
  const double h = length / steps;
  auto acc = [&](double s) { return g * s * s * s - energy * s; };
  for (int i = 0; i < steps; ++i) {
    const double k1y = p, k1p = acc(y);
    const double k2y = p + 0.5 * h * k1p, k2p = acc(y + 0.5 * h * k1y);
    const double k3y = p + 0.5 * h * k2p, k3p = acc(y + 0.5 * h * k2y);
    const double k4y = p + h * k3p, k4p = acc(y + h * k3y);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
  }
  return {y, p};
}

/// Bisection on a bracketing interval.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ringnls::oracle

#include "ringnls/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ringnls/errors.hpp"

namespace ringnls {

namespace {

constexpr double kPi = std::numbers::pi;

double determinant_slope(double k, double t, double v, double length) {
  const double s = std::sin(k * length);
  const double c = std::cos(k * length);
  return -(1.0 + t * t) * length * s + v * (length * c / k - s / (k * k));
}

// Determinant with cosh kL divided out so that deep bound states stay finite.
double hyperbolic_determinant(double kappa, double t, double v, double length) {
  if (kappa == 0.0) return (1.0 - t) * (1.0 - t) + v * length;
  const double kl = kappa * length;
  const double sech = kl > 700.0 ? 0.0 : 1.0 / std::cosh(kl);
  return (1.0 + t * t) + v / kappa * std::tanh(kl) - 2.0 * t * sech;
}

template <class Fn>
double bisect(Fn&& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b || b - a <= 1e-15 * std::max(1.0, std::abs(m))) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

BranchSign closer_branch(double k, const DefectParams& p) {
  const auto plus = linear_char(k, p, BranchSign::plus);
  const auto minus = linear_char(k, p, BranchSign::minus);
  const double ap = plus ? std::abs(*plus) : INFINITY;
  const double am = minus ? std::abs(*minus) : INFINITY;
  return ap <= am ? BranchSign::plus : BranchSign::minus;
}

double hyperbolic_char(double kappa, const DefectParams& p, BranchSign branch) {
  // t cosh kL - 1 -+ sqrt(1 - cosh kL (cosh kL + (v/kappa) sinh kL)), scaled by 1/cosh.
  const double kl = kappa * p.ring_length();
  const double sech = kl > 700.0 ? 0.0 : 1.0 / std::cosh(kl);
  const double arg = sech * sech - (1.0 + p.v_strength() / kappa * std::tanh(kl));
  const double root = std::sqrt(std::max(arg, 0.0));
  const double lhs = p.t_scale() - sech;
  return branch == BranchSign::plus ? lhs - root : lhs + root;
}

// x0 of sin k(x - x0) from the value condition, tan kx0 = sin kL / (cos kL - t).
// Where that condition holds identically (t = cos kL, sin kL = 0, e.g. the
// states vanishing at the defect when t = 1) the derivative condition
// tan kx0 = -k (1 - t cos kL) / (v - t k sin kL) fixes x0 instead.
double trig_offset(double k, const DefectParams& p) {
  const double t = p.t_scale();
  const double kl = k * p.ring_length();
  double num = std::sin(kl);
  double den = std::cos(kl) - t;
  if (std::hypot(num, den) < 1e-7 * (1.0 + std::abs(t))) {
    num = -k * (1.0 - t * std::cos(kl));
    den = p.v_strength() - t * k * std::sin(kl);
  }
  return std::atan(num / den) / k;
}

}  // namespace

std::optional<double> linear_char(double k, const DefectParams& params, BranchSign branch) {
  if (!(k > 0.0)) throw DomainError("linear_char: k must be positive");
  const double kl = k * params.ring_length();
  const double c = std::cos(kl);
  const double arg = 1.0 - c * (c + params.v_strength() / k * std::sin(kl));
  if (arg < 0.0) return std::nullopt;
  const double lhs = params.t_scale() * c - 1.0;
  return branch == BranchSign::plus ? lhs - std::sqrt(arg) : lhs + std::sqrt(arg);
}

double linear_determinant(double k, const DefectParams& params) {
  const double t = params.t_scale();
  const double kl = k * params.ring_length();
  if (k == 0.0) return (1.0 - t) * (1.0 - t) + params.v_strength() * params.ring_length();
  return (1.0 + t * t) * std::cos(kl) + params.v_strength() / k * std::sin(kl) - 2.0 * t;
}

std::vector<LinearLevel> linear_spectrum(const DefectParams& params, int n_levels) {
  if (n_levels < 1) throw DomainError("linear_spectrum: n_levels must be at least 1");
  const double t = params.t_scale();
  const double v = params.v_strength();
  const double length = params.ring_length();
  const double step = kPi / (8.0 * length);
  std::vector<LinearLevel> levels;

  // Negative levels. The scaled determinant tends to 1 + t^2 > 0 for large kappa.
  {
    const double kappa_max = (std::abs(v) + 2.0 * std::abs(t)) / (1.0 + t * t) + 2.0 / length + 1.0;
    auto h = [&](double kappa) { return hyperbolic_determinant(kappa, t, v, length); };
    double a = 0.0;
    double ha = h(a);
    while (a < kappa_max) {
      const double b = a + step;
      const double hb = h(b);
      if (ha != 0.0 && (hb == 0.0 || (ha < 0.0) != (hb < 0.0))) {
        const double kappa = hb == 0.0 ? b : bisect(h, a, b);
        LinearLevel lvl;
        lvl.k = kappa;
        lvl.energy = -kappa * kappa;
        lvl.negative = true;
        const double ap = std::abs(hyperbolic_char(kappa, params, BranchSign::plus));
        const double am = std::abs(hyperbolic_char(kappa, params, BranchSign::minus));
        lvl.branch_sign = ap <= am ? BranchSign::plus : BranchSign::minus;
        levels.push_back(lvl);
      }
      a = b;
      ha = hb;
    }
  }
  std::sort(levels.begin(), levels.end(), [](const auto& x, const auto& y) { return x.energy < y.energy; });

  auto d = [&](double k) { return linear_determinant(k, params); };
  auto dd = [&](double k) { return determinant_slope(k, t, v, length); };
  const double k_cap = 4.0 * n_levels + std::abs(v) + 16.0;
  auto push = [&](double k, std::optional<BranchSign> forced = std::nullopt, double x0_override = NAN) {
    LinearLevel lvl;
    lvl.k = k;
    lvl.energy = k * k;
    lvl.branch_sign = forced ? *forced : closer_branch(k, params);
    lvl.x0 = std::isnan(x0_override) ? trig_offset(k, params) : x0_override;
    levels.push_back(lvl);
  };
  // A monotone sub-interval [a, b] with endpoint values fa, fb. A zero at the
  // left end is owned by the previous interval.
  auto scan_monotone = [&](double a, double b, double fa, double fb) {
    if (fa != 0.0 && (fb == 0.0 || (fa < 0.0) != (fb < 0.0))) push(fb == 0.0 ? b : bisect(d, a, b));
  };
  // The grid is offset so that no exactly degenerate root (k L a multiple
  // of pi) falls on a grid point.
  double a = 0.0;
  double fa = d(0.0);
  double sa = 0.0;
  double next = 0.37 * step;
  int positive_found = 0;
  const int wanted = n_levels - static_cast<int>(levels.size());
  while (positive_found < wanted) {
    const double b = next;
    next += step;
    if (b > k_cap) {
      std::ostringstream msg;
      msg << "linear_spectrum: found " << positive_found << " of " << wanted << " positive levels below k = " << k_cap
          << " (t=" << t << ", v=" << v << ")";
      throw NumericalError(msg.str());
    }
    const double fb = d(b);
    const double sb = dd(b);
    const std::size_t before = levels.size();
    if (a > 0.0 && (sa < 0.0) != (sb < 0.0) && sa != 0.0) {
      // An extremum inside the cell: either a touching double root or two
      // separate roots on its monotone sides.
      const double ke = bisect(dd, a, b);
      const double fe = d(ke);
      const double scale = (1.0 + t * t) + std::abs(v) / ke;
      if (std::abs(fe) <= 1e-12 * scale) {
        const double kl = ke * length;
        const bool free_pair = std::abs(std::sin(kl)) < 1e-9 && std::abs(t - std::cos(kl)) < 1e-9;
        push(ke, BranchSign::plus, free_pair ? 0.0 : NAN);
        push(ke, BranchSign::minus, free_pair ? -kPi / (2.0 * ke) : NAN);
      } else {
        scan_monotone(a, ke, fa, fe);
        scan_monotone(ke, b, fe, fb);
      }
    } else {
      scan_monotone(a, b, fa, fb);
    }
    positive_found += static_cast<int>(levels.size() - before);
    a = b;
    fa = fb;
    sa = sb;
  }
  std::stable_sort(levels.begin(), levels.end(), [](const auto& x, const auto& y) { return x.energy < y.energy; });
  levels.resize(n_levels);
  return levels;
}

StationaryState linear_state(const LinearLevel& level, const DefectParams& params) {
  const double length = params.ring_length();
  StationaryState s;
  s.g = 0.0;
  s.energy = level.energy;
  s.defect = params;
  if (!level.negative) {
    const double k = level.k;
    const double mass = 0.5 * length - (std::sin(2.0 * k * (length - level.x0)) + std::sin(2.0 * k * level.x0)) / (4.0 * k);
    s.family = SolutionFamily::LinearTrig;
    s.x0 = level.x0;
    s.c = 0.5 * k * k / mass;
    return s;
  }
  // psi = P e^{kappa (x - L)} + Q e^{-kappa x}, P and Q fixed by the value condition.
  const double kappa = level.k;
  const double t = params.t_scale();
  const double decay = std::exp(-kappa * length);
  const double p = decay - t;
  const double q = t * decay - 1.0;
  if (p == 0.0 || q == 0.0) throw NumericalError("linear_state: pure exponential level has c = 0");
  s.family = SolutionFamily::LinearHyperbolic;
  const bool sinh_form = p * q < 0.0;
  s.x0 = 0.5 * length + std::log(std::abs(q / p)) / (2.0 * kappa);
  s.eta0 = p > 0.0 ? 0.0 : kPi;
  // amplitude 1 profile: c = +- kappa^2 / 2
  const double c_unit = sinh_form ? 0.5 * kappa * kappa : -0.5 * kappa * kappa;
  auto anti = [&](double u) {
    const double half = std::sinh(2.0 * kappa * u) / (4.0 * kappa);
    return sinh_form ? half - 0.5 * u : half + 0.5 * u;
  };
  const double mass = anti(length - s.x0) - anti(-s.x0);
  if (!std::isfinite(mass) || !(mass > 0.0) || !std::isfinite(c_unit / mass) || c_unit / mass == 0.0) {
    std::ostringstream msg;
    msg << "linear_state: bound level kappa = " << kappa << " is not representable in double precision";
    throw NumericalError(msg.str());
  }
  s.c = c_unit / mass;
  return s;
}

}  // namespace ringnls

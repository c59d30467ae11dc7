#include "ringnls/wavefunction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ringnls/elliptic.hpp"
#include "ringnls/errors.hpp"
#include "ringnls/quadrature.hpp"

namespace ringnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Quarter period, infinite at (and numerically next to) m = 1.
double quarter_period(double m, double m1) { return m1 <= 0.0 ? kInf : elliptic::complete_K(m, m1); }

// k+^2 - k-^2 from the discriminant, without the cancellation of the
// difference of two nearly equal roots.
double root_spread(double g, double energy, double c) {
  return 2.0 * std::sqrt(std::max(energy * energy - 4.0 * g * c, 0.0)) / std::abs(g);
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

double quarter_energy(double g, double energy) { return g != 0.0 ? energy * energy / (4.0 * g) : 0.0; }

bool admits(SolutionFamily family, double g, double energy, double c) {
  const double q = quarter_energy(g, energy);
  switch (family) {
    case SolutionFamily::SnBounded_PosG_PosE:
    case SolutionFamily::SnInverse_PosG_PosE:
      return g > 0.0 && energy > 0.0 && c >= 0.0 && c <= q;
    case SolutionFamily::CnInverse_PosG_PosE:
      return g > 0.0 && energy >= 0.0 && c <= 0.0 && (energy > 0.0 || c < 0.0);
    case SolutionFamily::SnBounded_PosG_NegE:
      return g > 0.0 && energy <= 0.0 && c >= q && c > 0.0;
    case SolutionFamily::SnInverse_PosG_NegE:
      return g > 0.0 && energy < 0.0 && c >= 0.0 && c <= q;
    case SolutionFamily::CnInverse_PosG_NegE:
      return g > 0.0 && energy < 0.0 && c < 0.0;
    case SolutionFamily::SnBounded_NegG_PosE:
      return g < 0.0 && energy >= 0.0 && c > 0.0;
    case SolutionFamily::CnBounded_NegG_NegE:
      return g < 0.0 && energy <= 0.0 && c >= 0.0 && (energy < 0.0 || c > 0.0);
    case SolutionFamily::DnBounded_NegG_NegE:
      return g < 0.0 && energy < 0.0 && c >= q && c <= 0.0;
    case SolutionFamily::RationalZeroE_NegG:
      return g > 0.0 && energy == 0.0 && c == 0.0;
    case SolutionFamily::LinearTrig:
      return g == 0.0 && energy > 0.0 && c > 0.0;
    case SolutionFamily::LinearHyperbolic:
      return g == 0.0 && energy < 0.0 && c != 0.0;
    case SolutionFamily::Constant:
      if (g == 0.0) return energy == 0.0;
      return energy / g > 0.0 && std::abs(c - q) <= 1e-12 * std::abs(q);
  }
  return false;
}

constexpr std::array<SolutionFamily, 13> kAllFamilies = {
    SolutionFamily::SnBounded_PosG_PosE, SolutionFamily::SnInverse_PosG_PosE, SolutionFamily::CnInverse_PosG_PosE,
    SolutionFamily::SnBounded_PosG_NegE, SolutionFamily::SnInverse_PosG_NegE, SolutionFamily::CnInverse_PosG_NegE,
    SolutionFamily::SnBounded_NegG_PosE, SolutionFamily::CnBounded_NegG_NegE, SolutionFamily::DnBounded_NegG_NegE,
    SolutionFamily::RationalZeroE_NegG,  SolutionFamily::LinearTrig,          SolutionFamily::LinearHyperbolic,
    SolutionFamily::Constant,
};

[[noreturn]] void fail_region(const StationaryState& s, const char* why) {
  std::ostringstream msg;
  msg << to_string(s.family) << ": " << why << " (g=" << s.g << ", E=" << s.energy << ", c=" << s.c << ")";
  throw DomainError(msg.str());
}

}  // namespace

DefectParams::DefectParams(double t_scale, double v_strength, double ring_length)
    : t_(t_scale), v_(v_strength), length_(ring_length) {
  if (!std::isfinite(t_scale) || !std::isfinite(v_strength) || !std::isfinite(ring_length)) {
    throw DomainError("DefectParams: parameters must be finite");
  }
  if (!(ring_length > 0.0)) throw DomainError("DefectParams: ring_length must be positive");
  if (t_scale == 0.0) throw DomainError("DefectParams: t = 0 disconnects the ring");
}

std::string_view to_string(SolutionFamily family) {
  switch (family) {
    case SolutionFamily::SnBounded_PosG_PosE: return "SnBounded_PosG_PosE";
    case SolutionFamily::SnInverse_PosG_PosE: return "SnInverse_PosG_PosE";
    case SolutionFamily::CnInverse_PosG_PosE: return "CnInverse_PosG_PosE";
    case SolutionFamily::SnBounded_PosG_NegE: return "SnBounded_PosG_NegE";
    case SolutionFamily::SnInverse_PosG_NegE: return "SnInverse_PosG_NegE";
    case SolutionFamily::CnInverse_PosG_NegE: return "CnInverse_PosG_NegE";
    case SolutionFamily::SnBounded_NegG_PosE: return "SnBounded_NegG_PosE";
    case SolutionFamily::CnBounded_NegG_NegE: return "CnBounded_NegG_NegE";
    case SolutionFamily::DnBounded_NegG_NegE: return "DnBounded_NegG_NegE";
    case SolutionFamily::RationalZeroE_NegG: return "RationalZeroE_NegG";
    case SolutionFamily::LinearTrig: return "LinearTrig";
    case SolutionFamily::LinearHyperbolic: return "LinearHyperbolic";
    case SolutionFamily::Constant: return "Constant";
  }
  return "?";
}

std::optional<SolutionFamily> family_from_string(std::string_view name) {
  for (SolutionFamily f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

bool is_singular(SolutionFamily family) {
  switch (family) {
    case SolutionFamily::SnInverse_PosG_PosE:
    case SolutionFamily::CnInverse_PosG_PosE:
    case SolutionFamily::SnBounded_PosG_NegE:
    case SolutionFamily::SnInverse_PosG_NegE:
    case SolutionFamily::CnInverse_PosG_NegE:
    case SolutionFamily::RationalZeroE_NegG:
      return true;
    default:
      return false;
  }
}

QuarticRoots quartic_roots(double g, double energy, double c) {
  if (g == 0.0) throw DomainError("quartic_roots: g must be non-zero");
  double disc = energy * energy - 4.0 * g * c;
  // Round-off on the double-root boundary c = E^2/4g.
  if (disc < 0.0 && disc > -1e-13 * energy * energy) disc = 0.0;
  if (disc < 0.0) return {false, 0.0, 0.0};
  // Cancellation-free quadratic roots of (g/2) y^2 - E y + 2c.
  const double q = 0.5 * (energy + std::copysign(std::sqrt(disc), energy == 0.0 ? 1.0 : energy));
  double y1 = 0.0;
  double y2 = 0.0;
  if (q != 0.0) {
    y1 = 2.0 * q / g;
    y2 = 2.0 * c / q;
  }
  return {true, std::max(y1, y2), std::min(y1, y2)};
}

KPair k_pm(double g, double energy, double c) {
  const QuarticRoots r = quartic_roots(g, energy, c);
  if (!r.real) {
    std::ostringstream msg;
    msg << "k_pm: negative discriminant E^2 - 4gc (c = " << c << " exceeds E^2/4g = " << quarter_energy(g, energy)
        << "); no SnBounded/SnInverse/Dn solution";
    throw DomainError(msg.str());
  }
  if (r.low < 0.0) {
    std::ostringstream msg;
    msg << "k_pm: k-^2 = " << r.low << " < 0 (c outside [0, E^2/4g] or E/g < 0)";
    throw DomainError(msg.str());
  }
  return {std::sqrt(r.high), std::sqrt(r.low)};
}

double first_integral(double g, double energy, double psi, double dpsi) {
  const double p2 = psi * psi;
  return 0.5 * (dpsi * dpsi - 0.5 * g * p2 * p2 + energy * p2);
}

double Residual3::norm() const {
  return std::sqrt(bc_derivative * bc_derivative + bc_value * bc_value + mass_defect * mass_defect);
}

Profile::Profile(const StationaryState& s)
    : x0_(s.x0), sign_(s.sign()), length_(s.defect.ring_length()) {
  const double g = s.g;
  const double energy = s.energy;
  const double c = s.c;
  if (!admits(s.family, g, energy, c) && s.family != SolutionFamily::Constant) {
    fail_region(s, "(g, E, c) outside the family's admissible region");
  }
  auto roots = [&] {
    const QuarticRoots r = quartic_roots(g, energy, c);
    if (!r.real) fail_region(s, "complex quartic roots");
    return r;
  };
  switch (s.family) {
    case SolutionFamily::SnBounded_PosG_PosE: {
      const auto r = roots();
      form_ = Form::Sn;
      amp_ = std::sqrt(std::max(r.low, 0.0));
      rate_ = std::sqrt(0.5 * g * r.high);
      set_parameter(std::max(r.low, 0.0) / r.high, root_spread(g, energy, c) / r.high);
      period_ = 4.0 * quarter_period(m_, m1_) / rate_;
      break;
    }
    case SolutionFamily::SnInverse_PosG_PosE: {
      const auto r = roots();
      form_ = Form::Ns;
      amp_ = std::sqrt(r.high);
      rate_ = std::sqrt(0.5 * g * r.high);
      set_parameter(std::max(r.low, 0.0) / r.high, root_spread(g, energy, c) / r.high);
      const double k = quarter_period(m_, m1_);
      period_ = 4.0 * k / rate_;
      pole_offset_ = 0.0;
      pole_spacing_ = 2.0 * k / rate_;
      break;
    }
    case SolutionFamily::CnInverse_PosG_PosE:
    case SolutionFamily::CnInverse_PosG_NegE: {
      const auto r = roots();
      form_ = Form::Nc;
      amp_ = std::sqrt(std::max(r.high, 0.0));
      rate_ = std::sqrt(0.5 * g * (r.high - r.low));
      set_parameter(-r.low / (r.high - r.low), std::max(r.high, 0.0) / (r.high - r.low));
      const double k = quarter_period(m_, m1_);
      period_ = 4.0 * k / rate_;
      if (std::isfinite(k)) {
        pole_offset_ = k / rate_;
        pole_spacing_ = 2.0 * k / rate_;
      }
      break;
    }
    case SolutionFamily::SnBounded_PosG_NegE: {
      const double rho = std::sqrt(4.0 * c / g);
      form_ = Form::HalfAmTan;
      amp_ = std::sqrt(rho);
      rate_ = std::sqrt(2.0 * g * rho);
      set_parameter(0.5 * (1.0 + energy / (g * rho)), 0.5 * (1.0 - energy / (g * rho)));
      const double k = quarter_period(m_, m1_);
      period_ = 4.0 * k / rate_;
      pole_offset_ = 2.0 * k / rate_;
      pole_spacing_ = 4.0 * k / rate_;
      break;
    }
    case SolutionFamily::SnInverse_PosG_NegE: {
      const auto r = roots();
      const double a2 = std::max(-r.high, 0.0);
      const double b2 = -r.low;
      form_ = Form::Cs;
      amp_ = std::sqrt(b2);
      rate_ = std::sqrt(0.5 * g * b2);
      set_parameter(1.0 - a2 / b2, a2 / b2);
      const double k = quarter_period(m_, m1_);
      period_ = 2.0 * k / rate_;
      pole_offset_ = 0.0;
      pole_spacing_ = 2.0 * k / rate_;
      break;
    }
    case SolutionFamily::SnBounded_NegG_PosE: {
      const auto r = roots();
      form_ = Form::Sn;
      amp_ = std::sqrt(r.high);
      rate_ = std::sqrt(0.5 * g * r.low);
      // Negative parameter; no precision issue near 1.
      m_ = r.high / r.low;
      m1_ = 1.0 - m_;
      period_ = 4.0 * elliptic::complete_K(m_) / rate_;
      break;
    }
    case SolutionFamily::CnBounded_NegG_NegE: {
      const auto r = roots();
      form_ = Form::Cn;
      amp_ = std::sqrt(r.high);
      rate_ = std::sqrt(-0.5 * g * (r.high - r.low));
      set_parameter(r.high / (r.high - r.low), -r.low / (r.high - r.low));
      period_ = 4.0 * quarter_period(m_, m1_) / rate_;
      break;
    }
    case SolutionFamily::DnBounded_NegG_NegE: {
      const auto r = roots();
      form_ = Form::Dn;
      amp_ = std::sqrt(r.high);
      rate_ = std::sqrt(-0.5 * g * r.high);
      set_parameter(root_spread(g, energy, c) / r.high, std::max(r.low, 0.0) / r.high);
      period_ = 2.0 * quarter_period(m_, m1_) / rate_;
      break;
    }
    case SolutionFamily::RationalZeroE_NegG:
      form_ = Form::Rational;
      amp_ = std::sqrt(2.0 / g);
      pole_offset_ = 0.0;
      break;
    case SolutionFamily::LinearTrig:
      form_ = Form::Sin;
      rate_ = std::sqrt(energy);
      amp_ = std::sqrt(2.0 * c / energy);
      period_ = 2.0 * kPi / rate_;
      break;
    case SolutionFamily::LinearHyperbolic:
      rate_ = std::sqrt(-energy);
      amp_ = std::sqrt(2.0 * std::abs(c) / -energy);
      form_ = c > 0.0 ? Form::Sinh : Form::Cosh;
      break;
    case SolutionFamily::Constant:
      form_ = Form::Flat;
      if (g != 0.0) {
        if (!(energy / g > 0.0)) fail_region(s, "uniform state needs E/g > 0");
        amp_ = std::sqrt(energy / g);
      } else {
        amp_ = 1.0 / std::sqrt(length_);
      }
      break;
  }
}

// m and m1 = 1 - m each from a cancellation-free expression; the smaller of
// the two is kept and the other derived, so m + m1 = 1 exactly.
void Profile::set_parameter(double m, double m1) {
  m = std::clamp(m, 0.0, 1.0);
  m1 = std::clamp(m1, 0.0, 1.0);
  if (m1 < m) {
    m1_ = m1;
    m_ = 1.0 - m1;
  } else {
    m_ = m;
    m1_ = 1.0 - m;
  }
}

elliptic::EllipticTriple Profile::jacobi(double w) const {
  return m_ >= 0.0 && m_ <= 1.0 ? elliptic::jacobi(w, m_, m1_) : elliptic::jacobi(w, m_);
}

double Profile::value(double x) const {
  const double u = x - x0_;
  switch (form_) {
    case Form::Sn: return sign_ * amp_ * jacobi(rate_ * u).sn;
    case Form::Ns: return sign_ * amp_ / jacobi(rate_ * u).sn;
    case Form::Nc: return sign_ * amp_ / jacobi(rate_ * u).cn;
    case Form::Cs: {
      const auto e = jacobi(rate_ * u);
      return sign_ * amp_ * e.cn / e.sn;
    }
    case Form::HalfAmTan: {
      // tan(am/2) = sn/(1+cn) = (1-cn)/sn
      const auto e = jacobi(rate_ * u);
      const double t = e.cn >= 0.0 ? e.sn / (1.0 + e.cn) : (1.0 - e.cn) / e.sn;
      return sign_ * amp_ * t;
    }
    case Form::Cn: return sign_ * amp_ * jacobi(rate_ * u).cn;
    case Form::Dn: return sign_ * amp_ * jacobi(rate_ * u).dn;
    case Form::Rational: return sign_ * amp_ / u;
    case Form::Sin: return sign_ * amp_ * std::sin(rate_ * u);
    case Form::Sinh: return sign_ * amp_ * std::sinh(rate_ * u);
    case Form::Cosh: return sign_ * amp_ * std::cosh(rate_ * u);
    case Form::Flat: return sign_ * amp_;
  }
  return 0.0;
}

double Profile::derivative(double x) const {
  const double u = x - x0_;
  const double scale = sign_ * amp_ * rate_;
  switch (form_) {
    case Form::Sn: {
      const auto e = jacobi(rate_ * u);
      return scale * e.cn * e.dn;
    }
    case Form::Ns: {
      const auto e = jacobi(rate_ * u);
      return -scale * e.cn * e.dn / (e.sn * e.sn);
    }
    case Form::Nc: {
      const auto e = jacobi(rate_ * u);
      return scale * e.sn * e.dn / (e.cn * e.cn);
    }
    case Form::Cs: {
      const auto e = jacobi(rate_ * u);
      return -scale * e.dn / (e.sn * e.sn);
    }
    case Form::HalfAmTan: {
      const auto e = jacobi(rate_ * u);
      // d/dw tan(am/2) = dn / (1 + cn) = dn (1 - cn) / sn^2
      const double d = e.cn >= 0.0 ? e.dn / (1.0 + e.cn) : e.dn * (1.0 - e.cn) / (e.sn * e.sn);
      return scale * d;
    }
    case Form::Cn: {
      const auto e = jacobi(rate_ * u);
      return -scale * e.sn * e.dn;
    }
    case Form::Dn: {
      const auto e = jacobi(rate_ * u);
      return -scale * m_ * e.sn * e.cn;
    }
    case Form::Rational: return -sign_ * amp_ / (u * u);
    case Form::Sin: return scale * std::cos(rate_ * u);
    case Form::Sinh: return scale * std::cosh(rate_ * u);
    case Form::Cosh: return scale * std::sinh(rate_ * u);
    case Form::Flat: return 0.0;
  }
  return 0.0;
}

double Profile::pole_clearance() const {
  if (std::isnan(pole_offset_)) return kInf;
  const double base = x0_ + pole_offset_;
  if (!std::isfinite(pole_spacing_)) {
    if (base >= 0.0 && base <= length_) return -std::min(base, length_ - base);
    return base < 0.0 ? -base : base - length_;
  }
  const double first = base + std::ceil(-base / pole_spacing_) * pole_spacing_;
  if (first <= length_) return -std::min(first, length_ - first);
  return std::min(first - length_, pole_spacing_ - first);
}

double eval_psi(const StationaryState& state, double x) {
  const Profile p(state);
  if (p.pole_clearance() <= 0.0) fail_region(state, "pole inside [0, L]");
  return p.value(x);
}

double eval_dpsi(const StationaryState& state, double x) {
  const Profile p(state);
  if (p.pole_clearance() <= 0.0) fail_region(state, "pole inside [0, L]");
  return p.derivative(x);
}

double mass_integral(const StationaryState& state, const QuadratureConfig& config) {
  const Profile p(state);
  const double clearance = p.pole_clearance();
  if (clearance <= 0.0) fail_region(state, "pole inside [0, L]");
  const double length = state.defect.ring_length();

  // Distance of the nearest pole beyond each end, for panel grading.
  double left_gap = kInf;
  double right_gap = kInf;
  if (std::isfinite(clearance)) {
    const double eps = 1e-9 * length;
    const double v0 = std::abs(p.value(0.0));
    const double vl = std::abs(p.value(length));
    // The end with the larger |psi| is the one facing the pole; when both
    // ends are close to poles grade both.
    if (clearance < length) {
      if (v0 >= vl || std::abs(v0 - vl) < eps) left_gap = clearance;
      if (vl >= v0 || std::abs(v0 - vl) < eps) right_gap = clearance;
    }
  }
  auto integrand = [&](double x) {
    const double v = p.value(x);
    return v * v;
  };
  const double result =
      quadrature::graded_gauss_legendre(integrand, 0.0, length, left_gap, right_gap, config.order, config.panels,
                                        config.rel_tol, config.max_doublings);
  return result;
}

Residual3 residual(const StationaryState& state, const QuadratureConfig& config) {
  const Profile p(state);
  if (p.pole_clearance() <= 0.0) fail_region(state, "pole inside [0, L]");
  const double length = state.defect.ring_length();
  const double t = state.defect.t_scale();
  const double v = state.defect.v_strength();
  const double psi0 = p.value(0.0);
  const double psil = p.value(length);
  const double dpsi0 = p.derivative(0.0);
  const double dpsil = p.derivative(length);
  Residual3 r;
  r.bc_derivative = dpsi0 - t * dpsil - v * psi0;
  r.bc_value = t * psi0 - psil;
  r.mass_defect = mass_integral(state, config) - 1.0;
  return r;
}

std::vector<SolutionFamily> admissible_families(double g, double energy, double c) {
  std::vector<SolutionFamily> out;
  for (SolutionFamily f : kAllFamilies) {
    if (admits(f, g, energy, c)) out.push_back(f);
  }
  return out;
}

bool is_admissible(const StationaryState& state) {
  if (!std::isfinite(state.energy) || !std::isfinite(state.c) || !std::isfinite(state.x0)) return false;
  if (state.family != SolutionFamily::Constant && !admits(state.family, state.g, state.energy, state.c)) {
    return false;
  }
  if (state.family == SolutionFamily::Constant && state.g != 0.0 && !(state.energy / state.g > 0.0)) return false;
  if (!is_singular(state.family)) return true;
  return Profile(state).pole_clearance() > 0.0;
}

StationaryState reduce_offset(StationaryState state) {
  const double period = Profile(state).period();
  if (!std::isfinite(period) || period <= 0.0) return state;
  const double centre = 0.5 * state.defect.ring_length();
  state.x0 -= period * std::nearbyint((state.x0 - centre) / period);
  return state;
}

std::optional<SolutionFamily> classify_initial_data(double g, double energy, double psi0, double dpsi0) {
  const double c = first_integral(g, energy, psi0, dpsi0);
  const double p2 = psi0 * psi0;
  const double scale = std::max({std::abs(energy) * p2, std::abs(g) * p2 * p2, dpsi0 * dpsi0, 1e-300});
  if (psi0 == 0.0 && dpsi0 == 0.0) return std::nullopt;
  if (g == 0.0) {
    if (energy > 0.0) return SolutionFamily::LinearTrig;
    if (energy < 0.0) return c != 0.0 ? std::optional(SolutionFamily::LinearHyperbolic) : std::nullopt;
    if (dpsi0 == 0.0) return SolutionFamily::Constant;
    return std::nullopt;
  }
  // Equilibrium of the phase plane: psi^2 = E/g, psi' = 0.
  if (energy / g > 0.0 && std::abs(dpsi0) * std::abs(dpsi0) <= 1e-24 * scale &&
      std::abs(g * p2 - energy) <= 1e-12 * std::abs(energy)) {
    return SolutionFamily::Constant;
  }
  const double q = quarter_energy(g, energy);
  if (g > 0.0) {
    if (energy > 0.0) {
      if (c <= 0.0) return SolutionFamily::CnInverse_PosG_PosE;
      if (c > q) return std::nullopt;
      const QuarticRoots r = quartic_roots(g, energy, c);
      return p2 <= 0.5 * (r.low + r.high) ? SolutionFamily::SnBounded_PosG_PosE : SolutionFamily::SnInverse_PosG_PosE;
    }
    if (energy == 0.0) {
      if (c > 0.0) return SolutionFamily::SnBounded_PosG_NegE;
      if (c < 0.0) return SolutionFamily::CnInverse_PosG_PosE;
      return SolutionFamily::RationalZeroE_NegG;
    }
    if (c < 0.0) return SolutionFamily::CnInverse_PosG_NegE;
    if (c <= q) return SolutionFamily::SnInverse_PosG_NegE;
    return SolutionFamily::SnBounded_PosG_NegE;
  }
  if (energy > 0.0) return c > 0.0 ? std::optional(SolutionFamily::SnBounded_NegG_PosE) : std::nullopt;
  if (energy == 0.0) return c > 0.0 ? std::optional(SolutionFamily::SnBounded_NegG_PosE) : std::nullopt;
  if (c > 0.0) return SolutionFamily::CnBounded_NegG_NegE;
  if (c >= q) return SolutionFamily::DnBounded_NegG_NegE;
  return std::nullopt;
}

StationaryState state_from_initial_data(const DefectParams& defect, double g, double energy, double psi0,
                                        double dpsi0) {
  const auto family = classify_initial_data(g, energy, psi0, dpsi0);
  const double c = first_integral(g, energy, psi0, dpsi0);
  if (!family) {
    std::ostringstream msg;
    msg << "state_from_initial_data: orbit through (psi, psi') = (" << psi0 << ", " << dpsi0
        << ") lies in no solution family (g=" << g << ", E=" << energy << ", c=" << c << ")";
    throw DomainError(msg.str());
  }
  StationaryState s;
  s.family = *family;
  s.g = g;
  s.energy = energy;
  s.c = c;
  s.defect = defect;
  if (s.family == SolutionFamily::Constant) {
    s.c = quarter_energy(g, energy);
    s.eta0 = psi0 < 0.0 ? kPi : 0.0;
    return s;
  }
  // Clamp c onto the family's closed region (round-off on a boundary).
  if (s.family == SolutionFamily::SnBounded_PosG_PosE || s.family == SolutionFamily::SnInverse_PosG_PosE ||
      s.family == SolutionFamily::SnInverse_PosG_NegE) {
    s.c = std::clamp(s.c, 0.0, quarter_energy(g, energy));
  }
  if (s.family == SolutionFamily::DnBounded_NegG_NegE) s.c = std::clamp(s.c, quarter_energy(g, energy), 0.0);

  const Profile p(s);  // x0 = 0, sign +1
  const double a = p.amp_;
  const double rate = p.rate_;
  const double m = p.m_;
  double sigma = 1.0;
  double w = 0.0;  // profile argument (rate * (0 - x0)) at x = 0
  using F = Profile::Form;
  switch (p.form_) {
    case F::Sn: {
      const double s_ = clamp_unit(psi0 / a);
      const double dn = std::sqrt(1.0 - m * s_ * s_);
      const double cn = dpsi0 / (a * rate * dn);
      w = elliptic::incomplete_F(std::atan2(s_, cn), m);
      break;
    }
    case F::Ns: {
      const double sn = clamp_unit(a / psi0);
      const double dn = std::sqrt(1.0 - m * sn * sn);
      const double cn = -dpsi0 * sn * sn / (a * rate * dn);
      w = elliptic::incomplete_F(std::atan2(sn, cn), m);
      break;
    }
    case F::Nc: {
      const double cn = clamp_unit(a / psi0);
      const double dn = std::sqrt(1.0 - m + m * cn * cn);
      const double sn = dpsi0 * cn * cn / (a * rate * dn);
      w = elliptic::incomplete_F(std::atan2(sn, cn), m);
      break;
    }
    case F::Cs: {
      sigma = dpsi0 > 0.0 ? -1.0 : 1.0;
      w = elliptic::incomplete_F(std::atan2(1.0, sigma * psi0 / a), m);
      break;
    }
    case F::HalfAmTan: {
      sigma = sign_of(dpsi0);
      w = elliptic::incomplete_F(2.0 * std::atan(sigma * psi0 / a), m);
      break;
    }
    case F::Cn: {
      const double cn = clamp_unit(psi0 / a);
      const double dn = std::sqrt(1.0 - m + m * cn * cn);
      const double sn = -dpsi0 / (a * rate * dn);
      w = elliptic::incomplete_F(std::atan2(sn, cn), m);
      break;
    }
    case F::Dn: {
      sigma = sign_of(psi0);
      if (m > 0.0) {
        const double d = std::clamp(std::abs(psi0) / a, std::sqrt(1.0 - m), 1.0);
        const double sn2 = std::clamp((1.0 - d * d) / m, 0.0, 1.0);
        const double sn = -sign_of(sigma * dpsi0) * std::sqrt(sn2);
        w = elliptic::incomplete_F(std::atan2(sn, std::sqrt(1.0 - sn2)), m);
      }
      break;
    }
    case F::Rational:
      sigma = dpsi0 > 0.0 ? -1.0 : 1.0;
      w = sigma * a / psi0;
      break;
    case F::Sin:
      w = std::atan2(psi0 / a, dpsi0 / (a * rate));
      break;
    case F::Sinh:
      sigma = sign_of(dpsi0);
      w = std::asinh(sigma * psi0 / a);
      break;
    case F::Cosh: {
      sigma = sign_of(psi0);
      const double mag = std::acosh(std::max(1.0, std::abs(psi0) / a));
      w = sign_of(sigma * dpsi0) * mag;
      break;
    }
    case F::Flat:
      break;
  }
  s.x0 = (p.form_ == F::Rational) ? -w : -w / rate;
  s.eta0 = sigma > 0.0 ? 0.0 : kPi;
  return reduce_offset(s);
}

StationaryState constant_state(const DefectParams& defect, double g) {
  StationaryState s;
  s.family = SolutionFamily::Constant;
  s.g = g;
  s.energy = g / defect.ring_length();
  s.c = quarter_energy(g, s.energy);
  s.defect = defect;
  return s;
}

double overlap(const StationaryState& a, const StationaryState& b, const QuadratureConfig& config) {
  const Profile pa(a);
  const Profile pb(b);
  const double length = a.defect.ring_length();
  return quadrature::composite_gauss_legendre([&](double x) { return pa.value(x) * pb.value(x); }, 0.0, length,
                                              config.order, config.panels);
}

}  // namespace ringnls

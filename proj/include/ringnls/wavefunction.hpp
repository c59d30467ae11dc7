#pragma once

// Stationary states of  -psi'' + g psi^3 = E psi  on a ring [0, L) whose ends
// meet at a point defect:
//
//   psi'(0) - t psi'(L) = v psi(0),      t psi(0) - psi(L) = 0,
//
// normalized to unit mass. Every real solution is parameterized by the energy
// E, the first-integral constant c of
//
//   (psi')^2 = (g/2) psi^4 - E psi^2 + 2c,
//
// an offset x0 and a sign exp(i eta0) with eta0 in {0, pi}.
//
// Writing k+^2 >= k-^2 for the two roots of (g/2) y^2 - E y + 2c, the
// families and the profile each one evaluates are:
//
//   SnBounded_PosG_PosE    k- sn(sqrt(g/2) k+ u | k-^2/k+^2)       0 <= c <= E^2/4g
//   SnInverse_PosG_PosE    k+ / sn(sqrt(g/2) k+ u | k-^2/k+^2)     0 <= c <= E^2/4g
//   CnInverse_PosG_*       k+ / cn(sqrt(g(k+^2-k-^2)/2) u | -k-^2/(k+^2-k-^2))   c <= 0
//   SnBounded_PosG_NegE    sqrt(r) tan(am(sqrt(2 g r) u | m)/2),
//                          r = sqrt(4c/g), m = (1 + E/(g r))/2     c >= E^2/4g (complex roots)
//   SnInverse_PosG_NegE    b cs(sqrt(g/2) b u | 1 - a^2/b^2),
//                          a^2 = -k+^2, b^2 = -k-^2                0 <= c <= E^2/4g
//   SnBounded_NegG_PosE    k+ sn(sqrt(g k-^2/2) u | k+^2/k-^2)     c >= 0 (parameter < 0)
//   CnBounded_NegG_NegE    k+ cn(sqrt(-g(k+^2-k-^2)/2) u | k+^2/(k+^2-k-^2))   c >= 0
//   DnBounded_NegG_NegE    k+ dn(sqrt(-g/2) k+ u | (k+^2-k-^2)/k+^2)   E^2/4g <= c <= 0
//   RationalZeroE_NegG     sqrt(2/g) / u                            g > 0, E = 0, c = 0
//   LinearTrig             sqrt(2c/E) sin(sqrt(E) u)               g = 0, E > 0
//   LinearHyperbolic       sqrt(2|c|/|E|) sinh or cosh(sqrt(-E) u) g = 0, E < 0
//   Constant               sqrt(E/g)  (1/sqrt(L) when g = 0)        c = E^2/4g
//
// with u = x - x0. The printed complex-root and imaginary-modulus forms of
// the E < 0, g > 0 branches are replaced by the equivalent real forms above
// (Jacobi imaginary transformation); the roots are always ordered so that
// k+^2 >= k-^2.

#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ringnls/elliptic.hpp"

namespace ringnls {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Ring length and the two connection parameters of the defect.
class DefectParams {
 public:
  DefectParams(double t_scale, double v_strength, double ring_length = kTwoPi);

  double t_scale() const { return t_; }
  double v_strength() const { return v_; }
  double ring_length() const { return length_; }

  DefectParams with_t(double t) const { return DefectParams(t, v_, length_); }
  DefectParams with_v(double v) const { return DefectParams(t_, v, length_); }

  bool operator==(const DefectParams&) const = default;

 private:
  double t_;
  double v_;
  double length_;
};

enum class SolutionFamily {
  SnBounded_PosG_PosE,
  SnInverse_PosG_PosE,
  CnInverse_PosG_PosE,
  SnBounded_PosG_NegE,
  SnInverse_PosG_NegE,
  CnInverse_PosG_NegE,
  SnBounded_NegG_PosE,
  CnBounded_NegG_NegE,
  DnBounded_NegG_NegE,
  RationalZeroE_NegG,
  LinearTrig,
  LinearHyperbolic,
  Constant,
};

std::string_view to_string(SolutionFamily family);
std::optional<SolutionFamily> family_from_string(std::string_view name);

/// True for families whose profile has poles on the real line.
bool is_singular(SolutionFamily family);

struct StationaryState {
  SolutionFamily family = SolutionFamily::Constant;
  double g = 0.0;
  double energy = 0.0;
  double c = 0.0;
  double x0 = 0.0;
  double eta0 = 0.0;  // 0 or pi
  DefectParams defect{1.0, 0.0};

  double sign() const { return eta0 == 0.0 ? 1.0 : -1.0; }
};

/// Ordered roots k+^2 >= k-^2 of (g/2) y^2 - E y + 2c (g != 0).
struct QuarticRoots {
  bool real = false;
  double high = 0.0;
  double low = 0.0;
};
QuarticRoots quartic_roots(double g, double energy, double c);

struct KPair {
  double k_plus;
  double k_minus;
};

/// k+ >= k- >= 0 with k±^2 = (E ± sqrt(E^2 - 4gc))/g. Throws DomainError when
/// either square is negative or the discriminant is.
KPair k_pm(double g, double energy, double c);

/// c = ((psi')^2 - (g/2) psi^4 + E psi^2) / 2.
double first_integral(double g, double energy, double psi, double dpsi);

struct Residual3 {
  double bc_derivative = 0.0;
  double bc_value = 0.0;
  double mass_defect = 0.0;

  double norm() const;
};

struct QuadratureConfig {
  int order = 32;  // Gauss-Legendre points per panel
  int panels = 64;
  double rel_tol = 1e-10;
  int max_doublings = 6;
};

/// Precomputed evaluator for one state's profile.
class Profile {
 public:
  explicit Profile(const StationaryState& state);

  double value(double x) const;
  double derivative(double x) const;

  /// Spatial period of psi itself (sign included); +inf when aperiodic.
  double period() const { return period_; }
  /// Signed distance from [0, L] to the nearest pole: negative when a pole
  /// lies inside the closed interval, +inf for pole-free profiles.
  double pole_clearance() const;

  double parameter() const { return m_; }

 private:
  friend StationaryState state_from_initial_data(const DefectParams&, double, double, double, double);

  enum class Form { Sn, Ns, Nc, Cs, HalfAmTan, Cn, Dn, Rational, Sin, Sinh, Cosh, Flat };

  void set_parameter(double m, double m1);
  elliptic::EllipticTriple jacobi(double w) const;

  Form form_ = Form::Flat;
  double amp_ = 0.0;
  double rate_ = 0.0;
  double m_ = 0.0;
  double m1_ = 1.0;  // 1 - m, kept separately for m near 1
  double x0_ = 0.0;
  double sign_ = 1.0;
  double length_ = kTwoPi;
  double period_ = std::numeric_limits<double>::infinity();
  // Poles at x0 + pole_offset_ + j * pole_spacing_ (single pole when the
  // spacing is infinite); pole_offset_ is NaN for pole-free forms.
  double pole_offset_ = std::numeric_limits<double>::quiet_NaN();
  double pole_spacing_ = std::numeric_limits<double>::infinity();
};

double eval_psi(const StationaryState& state, double x);
double eval_dpsi(const StationaryState& state, double x);

/// Integral of psi^2 over [0, L] by composite Gauss-Legendre quadrature with
/// doubling until two successive refinements agree to rel_tol. Panels are
/// graded toward a nearby pole. Throws NumericalError on non-convergence.
double mass_integral(const StationaryState& state, const QuadratureConfig& config = {});

/// (psi'(0) - t psi'(L) - v psi(0), t psi(0) - psi(L), mass - 1).
Residual3 residual(const StationaryState& state, const QuadratureConfig& config = {});

/// Families whose (sign g, sign E, c-range) admit (g, E, c).
std::vector<SolutionFamily> admissible_families(double g, double energy, double c);

/// (g, E, c) in the family's region and, for singular families, no pole in [0, L].
bool is_admissible(const StationaryState& state);

/// Reduce x0 by whole periods of psi to the window centred on L/2.
StationaryState reduce_offset(StationaryState state);

/// Build the state whose profile passes through (psi0, dpsi0) at x = 0.
/// The family is chosen from the phase-plane orbit; throws DomainError when
/// the orbit lies in no family (e.g. g > 0, E > 0, c > E^2/4g).
StationaryState state_from_initial_data(const DefectParams& defect, double g, double energy, double psi0,
                                        double dpsi0);

/// The family state_from_initial_data would pick, or nullopt.
std::optional<SolutionFamily> classify_initial_data(double g, double energy, double psi0, double dpsi0);

/// The uniform state psi = 1/sqrt(L), E = g/L.
StationaryState constant_state(const DefectParams& defect, double g);

/// Integral of psi_a psi_b over [0, L] (fixed composite Gauss-Legendre rule).
double overlap(const StationaryState& a, const StationaryState& b, const QuadratureConfig& config = {});

}  // namespace ringnls

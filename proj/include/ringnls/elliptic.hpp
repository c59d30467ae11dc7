#pragma once

// Jacobi elliptic functions and Legendre elliptic integrals for real
// arguments. The second argument is always the parameter m = k^2.

namespace ringnls::elliptic {

struct EllipticTriple {
  double sn;
  double cn;
  double dn;
};

/// Tolerances used by the identity and oracle checks of this module.
struct Tolerances {
  double identity = 1e-12;
  double oracle = 1e-9;
};

/// sn(u|m), cn(u|m), dn(u|m) for any finite u and any finite m.
///
/// [0, 1] is evaluated by the descending Landen / AGM scheme; m < 0 goes
/// through the negative-parameter transformation and m > 1 through the
/// reciprocal-parameter transformation.
EllipticTriple jacobi(double u, double m);

/// Same for m in [0, 1] with the complementary parameter m1 = 1 - m given
/// separately, so that m1 keeps full relative precision as m -> 1.
EllipticTriple jacobi(double u, double m, double m1);

/// Jacobi amplitude am(u|m) for m in [0, 1), continuous in u.
double amplitude(double u, double m);

/// Complete integral of the first kind K(m). Requires m < 1 - 1e-15.
double complete_K(double m);

/// K from the complementary parameter m1 = 1 - m > 0 (full precision as m -> 1).
double complete_K(double m, double m1);

/// Complete integral of the second kind E(m). Requires m <= 1.
double complete_E(double m);

/// Incomplete integral of the first kind F(phi|m) for m < 1 (m = 1 is
/// accepted on |phi| < pi/2).
/// Extended quasi-periodically to all real phi: F(phi + j*pi) = F(phi) + 2jK.
double incomplete_F(double phi, double m);

/// E(am(u|m)|m) = integral of dn^2(t|m) dt over [0, u]; m in [0, 1).
double incomplete_E(double u, double m);

/// Carlson symmetric integrals.
double carlson_rf(double x, double y, double z);
double carlson_rd(double x, double y, double z);

}  // namespace ringnls::elliptic

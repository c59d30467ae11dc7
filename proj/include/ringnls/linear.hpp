#pragma once

// Spectrum of the g = 0 ring. Positive levels are psi = sin k(x - x0) with k
// a root of
//
//   t cos kL = 1 +- sqrt(1 - cos kL (cos kL + (v/k) sin kL)),
//
// equivalently of the determinant (1+t^2) cos kL + (v/k) sin kL - 2t = 0
// (the squared form also admits cos kL = 0, which is not a level). Negative
// levels E = -kappa^2 use sinh/cosh and the same determinant with
// cos -> cosh, sin/k -> sinh/kappa.

#include <optional>
#include <vector>

#include "ringnls/wavefunction.hpp"

namespace ringnls {

enum class BranchSign { plus, minus };

struct LinearLevel {
  double k = 0.0;       // wavenumber; kappa for a negative level
  double energy = 0.0;  // k^2, or -kappa^2 when negative
  double x0 = 0.0;
  BranchSign branch_sign = BranchSign::plus;
  bool negative = false;
};

/// t cos kL - 1 -+ sqrt(...) for the chosen branch; nullopt where the
/// square-root argument is negative (no level on that branch). k <= 0 throws.
std::optional<double> linear_char(double k, const DefectParams& params, BranchSign branch);

/// (1+t^2) cos kL + (v/k) sin kL - 2t.
double linear_determinant(double k, const DefectParams& params);

/// The n_levels lowest levels, ascending in E, negative levels included.
/// E = 0 (the uniform state at t = 1, v = 0) is not reported. Exactly
/// degenerate levels appear twice with orthogonal offsets.
std::vector<LinearLevel> linear_spectrum(const DefectParams& params, int n_levels);

/// Unit-mass g = 0 state of a level.
StationaryState linear_state(const LinearLevel& level, const DefectParams& params);

}  // namespace ringnls

#pragma once

// Newton solver for admissible stationary states and an RK4 shooting
// solver that never touches the elliptic-function forms.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "ringnls/wavefunction.hpp"

namespace ringnls {

struct SolveConfig {
  double tol_residual = 1e-10;
  int max_iterations = 60;
  double fd_step = 1e-7;  // relative central-difference step
  double damping = 0.5;
  int max_backtracks = 25;
  // Starts coarser than the QuadratureConfig default; the doubling test
  // still enforces rel_tol on every mass evaluation.
  QuadratureConfig quadrature{32, 8, 1e-13, 8};
  int shooting_steps = 8192;
  // RK4 round-off near a pole floors the shooting residual around 1e-10.
  double shooting_tol_residual = 1e-9;
};

enum class SolveStatus { converged, diverged, left_admissible_region, max_iterations };

const char* to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::diverged;
  StationaryState state;
  int iterations = 0;
  double final_residual_norm = 0.0;
  std::vector<double> residual_history;  // norm before each step, last entry final
};

struct Guess {
  double energy = 0.0;
  double c = 0.0;
  double x0 = 0.0;
};

using Triple = std::array<double, 3>;

/// Three equations in up to three unknowns. `residual` returns nullopt for
/// inadmissible points; `normalize` maps an accepted point to its canonical
/// representative (e.g. offset reduction).
struct NewtonProblem {
  std::function<std::optional<Triple>(const Triple&)> residual;
  Triple scales{1.0, 1.0, 1.0};
  std::array<bool, 3> free{true, true, true};
  std::function<Triple(const Triple&)> normalize;
};

struct NewtonResult {
  SolveStatus status = SolveStatus::diverged;
  Triple point{};
  int iterations = 0;
  double final_residual_norm = 0.0;
  std::vector<double> residual_history;
};

/// Column scales for (E, c, x0) used by the Newton solvers.
Triple unknown_scales(const StationaryState& state);

/// E < 0 families bordering c = 0, where psi = 0 is a saddle: the profile
/// depends on log|c| and c can be exponentially small, so c is scaled by |c|.
bool separatrix_at_zero_c(SolutionFamily family);

/// Which of (E, c, x0) a family lets vary (c is tied to E for the uniform
/// state, E and c are pinned for the rational one).
std::array<bool, 3> free_unknowns(SolutionFamily family);

/// Both solvers divide the two boundary rows by max(1, |t|); otherwise the
/// value row grows like t and no absolute tolerance works near t = +-inf.
double boundary_row_weight(const DefectParams& defect);

/// Weighted residual as a triple, or nullopt when the state is outside its
/// family region, has a pole on the ring or defeats the quadrature.
std::optional<Triple> guarded_residual(const StationaryState& state, const QuadratureConfig& config);

/// Norm of the weighted residual; +inf where guarded_residual gives up.
double residual_norm(const StationaryState& state, const QuadratureConfig& config);

/// Damped Newton with central-difference Jacobian (one-sided at a region
/// edge), minimum-norm least-squares steps on scaled unknowns and
/// backtracking on the residual norm.
NewtonResult damped_newton(const NewtonProblem& problem, const Triple& start, const SolveConfig& config);

/// Damped Newton on (E, c, x0) with a central-difference Jacobian and
/// minimum-norm least-squares steps (the offset is a null direction of the
/// translation-invariant defect t = 1, v = 0).
SolveOutcome newton_solve(SolutionFamily family, const DefectParams& params, double g, const Guess& guess,
                          const SolveConfig& config = {});

/// Same, seeded from a full state (family, sign and defect taken from it).
SolveOutcome newton_solve(const StationaryState& seed, const SolveConfig& config = {});

struct Shot {
  double psi = 0.0;
  double dpsi = 0.0;
  double mass = 0.0;  // integral of psi^2 over [0, L]
};

/// Classical RK4 for psi'' = g psi^3 - E psi on [0, L]. Throws NumericalError
/// naming the position when |psi| exceeds 1e8.
Shot shoot(double g, double energy, double psi0, double dpsi0, double length, int n_steps);

struct ShootingOutcome {
  SolveStatus status = SolveStatus::diverged;
  double energy = 0.0;
  double psi0 = 0.0;
  double dpsi0 = 0.0;
  int iterations = 0;
  double final_residual_norm = 0.0;
};

/// Newton on (E, psi(0), psi'(0)) for (psi(L) - t psi(0), psi'(0) - t psi'(L) - v psi(0), mass - 1).
ShootingOutcome shooting_solve(const DefectParams& params, double g, double energy, double psi0, double dpsi0,
                               const SolveConfig& config = {});

}  // namespace ringnls

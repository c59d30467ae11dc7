#pragma once

// Branch tracking in one parameter, plus the loop analyses built on it.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ringnls/solver.hpp"

namespace ringnls {

enum class SweepAxis { g, t, v };
enum class Termination { range_end, disappeared_at_admissibility_boundary, closed_loop, step_underflow };

std::string_view to_string(SweepAxis axis);
std::string_view to_string(Termination termination);

// Steps are taken in a chart of the swept parameter: g itself, 2 atan(t) so
// that t = +-inf is reachable, and asinh(v) so that |v| ~ 1e3 costs a few
// dozen steps. initial_step and min_step are measured in that chart.
double to_chart(SweepAxis axis, double value);
double from_chart(SweepAxis axis, double chart);

struct SweepSpec {
  SweepAxis axis = SweepAxis::g;
  double start = 0.0;
  double end = 1.0;
  double initial_step = 0.05;
  double min_step = 1e-9;
  // Held-fixed values; the one on the swept axis is ignored.
  double g = 0.0;
  double t = 1.0;
  double v = 0.0;
  double length = kTwoPi;
  // Seeds need not be solved exactly; each is polished at `start`. When empty,
  // `linear_levels` seeds come from the g = 0 spectrum (axis g, start 0).
  std::vector<StationaryState> seeds;
  int linear_levels = 0;
  int max_points_per_branch = 4000;
  bool allow_turning = true;
  // t axis only: go from start to end the way through t = +-inf instead of
  // through t = 0 (the 2 atan t chart is a circle).
  bool through_infinity = false;
  int threads = 1;  // branches are independent
  SolveConfig solve;
};

struct BranchPoint {
  double axis_value = 0.0;
  StationaryState state;
  double residual_norm = 0.0;
};

struct Branch {
  std::vector<BranchPoint> points;
  Termination termination = Termination::range_end;
  std::vector<SolutionFamily> family_history;  // first entry is the seed's family
};

/// Seeds from the g = 0 spectrum: the uniform state when (t, v) = (1, 0),
/// then linear levels, n in total, ordered by energy.
std::vector<StationaryState> linear_seeds(const DefectParams& params, int n);

/// Continues every seed over [start, end]. Duplicate seeds (same E, c and
/// profile up to sign) are dropped. Throws DomainError when no seed
/// converges at start.
std::vector<Branch> sweep(const SweepSpec& spec);

/// One branch; throws NumericalError when the seed does not converge.
Branch continue_branch(const StationaryState& seed, const SweepSpec& spec);

/// psi(x) -> psi(nx) with (g, E, c) -> n^2 (g, E, c). Only for t = 1, v = 0.
StationaryState scaling_family(const StationaryState& state, int n);

/// Levels at (t, v) and coupling g, obtained by continuing linear levels in g.
/// Levels that disappear before reaching g are skipped, so fewer than n may
/// come back.
std::vector<StationaryState> levels_at(const DefectParams& params, double g, int n, const SolveConfig& config = {});

/// Distinct converged states of one family at (params, g), from Newton runs
/// over a grid of guesses: the given energies, c = +-r E^2/4g for a few r, and
/// 16 offsets around the ring. Ordered by energy. Finds branches that are not
/// connected to any linear level, such as the ring-shaped dn branches.
std::vector<StationaryState> family_census(const DefectParams& params, double g, SolutionFamily family,
                                           const std::vector<double>& energies, const SolveConfig& config = {});

enum class LoopKind { berry_loop_tv, exotic_v_cycle };

struct HolonomyReport {
  LoopKind loop_kind = LoopKind::berry_loop_tv;
  int sign_factor = 1;
  std::map<int, int> permutation;  // level index at -V -> index after the cycle
  std::vector<int> shifted_levels;
  std::string loop_description;
  std::vector<std::pair<double, double>> path;  // (t, v) along the loop
  std::vector<double> energies;                 // berry: E along the loop; exotic: E at -V by index
  std::vector<double> final_energies;           // exotic: E at the end of the cycle by starting index
  // exotic: largest distance of a level at +-V from the nearest Dirichlet
  // level, relative to (1 + |E|), and whether it is within the O(1/V) bound.
  double dirichlet_deviation = 0.0;
  bool dirichlet_limit_ok = true;
};

std::string_view to_string(LoopKind kind);

/// Continues `seed` once around the circle of `radius` about `center` in the
/// (2 atan t, v) chart, starting at angle 0, i.e. (2 atan t_c + radius, v_c).
HolonomyReport berry_loop(std::pair<double, double> center, double radius, double g, const StationaryState& seed,
                          int n_points, const SolveConfig& config = {});

struct ExoticOptions {
  // Where the defect-bound ground state is still representable; it is tracked
  // from here instead of from -v_magnitude.
  double bound_state_start = -40.0;
  double initial_step = 0.05;
  bool round_trip = false;  // -V -> +V -> -V without identification
};

/// Levels at t = t_fixed are carried from v = -V to v = +V; v = +-inf are the
/// same point (the Dirichlet ring), so each level is matched by energy to a
/// level at -V. The defect-bound ground state is index 0. With round_trip the
/// cycle is -V -> +V -> -V and the map should be the identity.
HolonomyReport exotic_cycle(double t_fixed, double v_magnitude, double g, int n_levels, const ExoticOptions& options = {},
                            const SolveConfig& config = {});

/// Energies of the lowest n states with psi(0) = psi(L) = 0 at unit mass.
std::vector<double> dirichlet_spectrum(double g, int n, double length = kTwoPi, const SolveConfig& config = {});

struct Degeneracy {
  double axis_value = 0.0;
  std::pair<int, int> level_pair;
  double gap = 0.0;
  bool crossing = false;
};

/// Crossings (gap changes sign) and avoided crossings (positive local minimum
/// of |gap| above tol) between branches adjacent in energy.
std::vector<Degeneracy> detect_degeneracies(const std::vector<Branch>& branches, double tol,
                                            SweepAxis axis = SweepAxis::t, const SolveConfig& config = {});

}  // namespace ringnls

#include "ringnls/continuation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <cmath>
#include <thread>

#include "ringnls/errors.hpp"
#include "ringnls/linear.hpp"

namespace ringnls {

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::g: return "g";
    case SweepAxis::t: return "t";
    case SweepAxis::v: return "v";
  }
  return "?";
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::range_end: return "range_end";
    case Termination::disappeared_at_admissibility_boundary: return "disappeared_at_admissibility_boundary";
    case Termination::closed_loop: return "closed_loop";
    case Termination::step_underflow: return "step_underflow";
  }
  return "?";
}

std::string_view to_string(LoopKind kind) {
  return kind == LoopKind::berry_loop_tv ? "berry_loop_tv" : "exotic_v_cycle";
}

double to_chart(SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::g: return value;
    case SweepAxis::t: return 2.0 * std::atan(value);
    case SweepAxis::v: return std::asinh(value);
  }
  return value;
}

double from_chart(SweepAxis axis, double chart) {
  switch (axis) {
    case SweepAxis::g: return chart;
    case SweepAxis::t: return std::tan(0.5 * chart);
    case SweepAxis::v: return std::sinh(chart);
  }
  return chart;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Throws DomainError for t = 0.
StationaryState at_chart(StationaryState s, SweepAxis axis, double a) {
  const double value = from_chart(axis, a);
  switch (axis) {
    case SweepAxis::g: s.g = value; break;
    case SweepAxis::t: s.defect = s.defect.with_t(value); break;
    case SweepAxis::v: s.defect = s.defect.with_v(value); break;
  }
  if (s.family == SolutionFamily::Constant) s.c = s.g != 0.0 ? s.energy * s.energy / (4.0 * s.g) : 0.0;
  return s;
}

double axis_value(const StationaryState& s, SweepAxis axis) {
  switch (axis) {
    case SweepAxis::g: return s.g;
    case SweepAxis::t: return s.defect.t_scale();
    case SweepAxis::v: return s.defect.v_strength();
  }
  return 0.0;
}

double boundary_q(const StationaryState& s) { return s.energy * s.energy / (4.0 * s.g); }

// Families whose region ends at c = E^2/4g with nothing beyond it.
bool has_q_boundary(const StationaryState& s) {
  return s.g > 0.0 && (s.family == SolutionFamily::SnBounded_PosG_PosE || s.family == SolutionFamily::SnInverse_PosG_PosE);
}

double period_of(const StationaryState& s) {
  try {
    return Profile(s).period();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

// x0 difference taken modulo the profile period.
double offset_delta(double x_new, double x_old, double period) {
  const double d = x_new - x_old;
  return std::isfinite(period) && period > 0.0 ? std::remainder(d, period) : d;
}

bool log_c(const StationaryState& s) { return separatrix_at_zero_c(s.family); }

// c at weight w along the secant from c0 (w = -1) to c1 (w = 0).
double extrapolate_c(const StationaryState& p0, const StationaryState& p1, double w) {
  if (log_c(p1) && p0.c * p1.c > 0.0) {
    return std::copysign(std::exp(std::log(std::abs(p1.c)) + w * std::log(p1.c / p0.c)), p1.c);
  }
  return p1.c + w * (p1.c - p0.c);
}

bool same_state(const StationaryState& a, const StationaryState& b, double tol) {
  if (std::abs(a.energy - b.energy) > tol * (1.0 + std::abs(a.energy))) return false;
  if (std::abs(a.c - b.c) > tol * (1.0 + std::abs(a.c))) return false;
  if (a.family == b.family && a.sign() == b.sign()) {
    return std::abs(offset_delta(a.x0, b.x0, period_of(a))) <= tol * std::max(1.0, a.defect.ring_length());
  }
  try {
    return overlap(a, b) >= 1.0 - tol;
  } catch (const std::exception&) {
    return false;
  }
}

std::optional<SolveOutcome> solve(const StationaryState& guess, const SolveConfig& config) {
  SolveOutcome out = newton_solve(guess, config);
  if (out.status == SolveStatus::converged) return out;
  return std::nullopt;
}

// Follows the ODE orbit of `prev` into the parameters of `target` and
// re-expresses the converged solution in whatever family contains it.
std::optional<SolveOutcome> reclassify(const StationaryState& prev, const StationaryState& target,
                                       const SolveConfig& config) {
  if (target.defect.t_scale() == 1.0 && target.defect.v_strength() == 0.0) {
    const StationaryState flat = constant_state(target.defect, target.g);
    if (std::abs(flat.energy - prev.energy) <= 1e-2 * (1.0 + std::abs(prev.energy)) &&
        std::abs(eval_dpsi(prev, 0.0)) <= 1e-3 * (1.0 + std::abs(eval_psi(prev, 0.0)))) {
      if (auto s = solve(flat, config)) return s;
    }
  }
  double psi0 = 0.0;
  double dpsi0 = 0.0;
  try {
    psi0 = eval_psi(prev, 0.0);
    dpsi0 = eval_dpsi(prev, 0.0);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  const ShootingOutcome shot = shooting_solve(target.defect, target.g, target.energy, psi0, dpsi0, config);
  if (shot.status == SolveStatus::converged) {
    try {
      const StationaryState seed = state_from_initial_data(target.defect, target.g, shot.energy, shot.psi0, shot.dpsi0);
      if (auto s = solve(seed, config)) return s;
    } catch (const std::exception&) {
    }
  }
  // Shooting is hopeless for strongly localized profiles (growth ~ e^{kappa L});
  // try the same (E, c, x0) in each family admitting it, with the extremum
  // either at x0 or half a period away, and keep a state resembling prev.
  for (SolutionFamily family : admissible_families(target.g, target.energy, target.c)) {
    StationaryState trial = target;
    trial.family = family;
    const double half = 0.5 * period_of(trial);
    for (double shift : {0.0, half}) {
      if (!std::isfinite(shift)) continue;
      StationaryState t2 = trial;
      t2.x0 += shift;
      if (!is_admissible(t2)) continue;
      auto s = solve(t2, config);
      if (!s) continue;
      try {
        if (std::abs(overlap(prev, s->state)) >= 0.9) return s;
      } catch (const std::exception&) {
      }
    }
  }
  return std::nullopt;
}

enum class Mode { param, energy };

// Newton over three of (chart value, E, c, x0) with the fourth pinned by
// `build`. Returns the unknowns and the outcome.
std::optional<std::pair<Triple, SolveOutcome>> solve_pinned(const std::function<StationaryState(const Triple&)>& build,
                                                            const Triple& guess, const Triple& scales,
                                                            int offset_slot, const SolveConfig& config) {
  NewtonProblem problem;
  problem.residual = [&](const Triple& u) -> std::optional<Triple> {
    try {
      return guarded_residual(build(u), config.quadrature);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  problem.scales = scales;
  problem.normalize = [&](const Triple& u) -> Triple {
    try {
      Triple w = u;
      w[offset_slot] = reduce_offset(build(u)).x0;
      return w;
    } catch (const std::exception&) {
      return u;
    }
  };
  const NewtonResult nr = damped_newton(problem, guess, config);
  if (nr.status != SolveStatus::converged) return std::nullopt;
  SolveOutcome out;
  out.status = nr.status;
  out.state = build(nr.point);
  out.iterations = nr.iterations;
  out.final_residual_norm = nr.final_residual_norm;
  out.residual_history = nr.residual_history;
  return std::make_pair(nr.point, out);
}

// Fixed E, unknowns (chart value, c, x0); used around turning points.
std::optional<std::pair<double, SolveOutcome>> solve_fixed_energy(const StationaryState& base, SweepAxis axis,
                                                                  double a_guess, double energy, double c_guess,
                                                                  double x0_guess, const SolveConfig& config) {
  auto build = [&](const Triple& u) {
    StationaryState s = at_chart(base, axis, u[0]);
    s.energy = energy;
    s.c = u[1];
    s.x0 = u[2];
    return s;
  };
  const Triple sc = unknown_scales(base);
  const auto res = solve_pinned(build, {a_guess, c_guess, x0_guess}, {1.0, sc[1], sc[2]}, 2, config);
  if (!res) return std::nullopt;
  return std::make_pair(res->first[0], res->second);
}

// Fixed c / (E^2/4g), unknowns (chart value, E, x0). Near that boundary the
// profile on the ring freezes into a kink while x0 runs off with the period,
// so the chart value and E stop being usable parameters.
std::optional<std::pair<double, SolveOutcome>> solve_fixed_ratio(const StationaryState& base, SweepAxis axis,
                                                                 double ratio, const Triple& guess,
                                                                 const SolveConfig& config) {
  auto build = [&](const Triple& u) {
    StationaryState s = at_chart(base, axis, u[0]);
    s.energy = u[1];
    s.c = ratio * u[1] * u[1] / (4.0 * s.g);
    s.x0 = u[2];
    return s;
  };
  const Triple sc = unknown_scales(base);
  const auto res = solve_pinned(build, guess, {1.0, sc[0], sc[2]}, 2, config);
  if (!res) return std::nullopt;
  return std::make_pair(res->first[0], res->second);
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  return *mid;
}

class Tracker {
 public:
  Tracker(const SweepSpec& spec) : spec_(spec), axis_(spec.axis) {
    a_start_ = to_chart(axis_, spec.start);
    double a_end = to_chart(axis_, spec.end);
    if (axis_ == SweepAxis::t && spec.through_infinity) a_end += a_end > a_start_ ? -2.0 * kPi : 2.0 * kPi;
    lo_ = std::min(a_start_, a_end);
    hi_ = std::max(a_start_, a_end);
    dir_ = a_end > a_start_ ? 1 : -1;
  }

  Branch run(const StationaryState& seed) {
    StationaryState s0 = at_chart(seed, axis_, a_start_);
    auto first = solve(s0, spec_.solve);
    if (!first) first = reclassify(s0, s0, spec_.solve);
    if (!first) throw NumericalError("continuation: seed does not converge at the start of the range");
    push(a_start_, *first);

    double h = spec_.initial_step;
    bool turn_tried = false;
    int turns = 0;
    int last_sign = 0;
    while (true) {
      if (static_cast<int>(branch_.points.size()) >= spec_.max_points_per_branch) {
        branch_.termination = Termination::step_underflow;
        break;
      }
      const auto step = attempt(h);
      if (step.accepted) {
        turn_tried = false;
        const int sgn = chart_.size() >= 2 ? (chart_.back() > chart_[chart_.size() - 2] ? 1 : -1) : 0;
        if (last_sign != 0 && sgn != last_sign && ++turns == 1) release_start_side();
        last_sign = sgn;
        if (step.at_bound) {
          branch_.termination = Termination::range_end;
          break;
        }
        if (turns > 0 && closes_loop()) {
          branch_.termination = Termination::closed_loop;
          break;
        }
        update_mode();
        if (step.iterations <= 4) h = std::min(spec_.initial_step, 1.5 * h);
        continue;
      }
      h *= 0.5;
      const bool near_boundary = has_q_boundary(last()) && last().c >= (1.0 - 1e-2) * boundary_q(last());
      if (h >= spec_.min_step) continue;
      if (pass_flat_point()) {
        mode_ = Mode::param;
        h = spec_.initial_step;
        continue;
      }
      if (near_boundary && approach_boundary()) {
        branch_.termination = Termination::disappeared_at_admissibility_boundary;
        break;
      }
      if (spec_.allow_turning && !turn_tried && chart_.size() >= 2 && last().family != SolutionFamily::Constant &&
          last().family != SolutionFamily::RationalZeroE_NegG) {
        turn_tried = true;
        switch_mode();
        h = spec_.initial_step;
        continue;
      }
      branch_.termination = Termination::step_underflow;
      break;
    }
    for (auto& p : branch_.points) p.axis_value = axis_value(p.state, axis_);
    return std::move(branch_);
  }

 private:
  struct Step {
    bool accepted = false;
    bool at_bound = false;
    int iterations = 0;
  };

  const StationaryState& last() const { return branch_.points.back().state; }

  void push(double a, const SolveOutcome& out) {
    if (branch_.family_history.empty() || branch_.family_history.back() != out.state.family) {
      branch_.family_history.push_back(out.state.family);
    }
    chart_.push_back(a);
    branch_.points.push_back({a, out.state, out.final_residual_norm});
  }

  // Secant extrapolation of (E, c, x0) to chart value a, with the previous
  // point's offset unwrapped.
  Triple predict_param(double a) const {
    const auto& p1 = last();
    Triple guess{p1.energy, p1.c, p1.x0};
    const std::size_t n = chart_.size();
    if (n < 2) return guess;
    const auto& p0 = branch_.points[n - 2].state;
    const double da = chart_[n - 1] - chart_[n - 2];
    if (p0.family != p1.family || da == 0.0) return guess;
    const double w = (a - chart_[n - 1]) / da;
    guess[0] += w * (p1.energy - p0.energy);
    guess[1] = extrapolate_c(p0, p1, w);
    guess[2] += w * offset_delta(p1.x0, p0.x0, period_of(p1));
    return guess;
  }

  Step attempt(double h) {
    return mode_ == Mode::param ? attempt_param(h) : attempt_energy(h);
  }

  Step attempt_param(double h) {
    Step step;
    double a = chart_.back() + dir_ * h;
    if (a >= hi_ || a <= lo_) {
      a = dir_ > 0 ? hi_ : lo_;
      step.at_bound = true;
      if (a == chart_.back()) {
        step.accepted = true;  // already there
        return step;
      }
    }
    StationaryState guess;
    try {
      guess = at_chart(last(), axis_, a);
    } catch (const DomainError&) {
      return {};
    }
    std::optional<SolveOutcome> out;
    // Pull the secant guess back toward the last point when it leaves the region.
    const Triple pred = predict_param(a);
    for (double lambda : {1.0, 0.5, 0.0}) {
      StationaryState trial = guess;
      trial.energy = last().energy + lambda * (pred[0] - last().energy);
      trial.c = last().c + lambda * (pred[1] - last().c);
      trial.x0 = last().x0 + lambda * (pred[2] - last().x0);
      if (trial.family == SolutionFamily::Constant) trial = at_chart(trial, axis_, a);
      if (!is_admissible(trial)) continue;
      out = solve(trial, spec_.solve);
      break;
    }
    if (!out || out->state.family == last().family) {
      if (!out) out = reclassify(last(), guess, spec_.solve);
    }
    if (!out || !continuous(a, out->state)) return {};
    if (!tracks(a, {pred[0], pred[1], pred[2]}, a, out->state, h)) return {};
    push(a, *out);
    step.accepted = true;
    step.iterations = out->iterations;
    return step;
  }

  Step attempt_energy(double h) {
    const auto& p1 = last();
    const std::size_t n = chart_.size();
    const auto& p0 = branch_.points[n - 2].state;
    const double e_scale = 1.0 + std::abs(p1.energy);
    const double de = energy_dir_ * h * e_scale;
    const double dE_prev = p1.energy - p0.energy;
    double a_guess = chart_.back();
    double c_guess = p1.c;
    double x_guess = p1.x0;
    if (dE_prev != 0.0 && p0.family == p1.family) {
      const double w = de / dE_prev;
      a_guess += w * (chart_[n - 1] - chart_[n - 2]);
      c_guess = extrapolate_c(p0, p1, w);
      x_guess += w * offset_delta(p1.x0, p0.x0, period_of(p1));
    }
    const auto res = solve_fixed_energy(p1, axis_, a_guess, p1.energy + de, c_guess, x_guess, spec_.solve);
    if (!res) return {};
    const double a = res->first;
    if (!tracks(a_guess, {p1.energy + de, c_guess, x_guess}, a, res->second.state, h)) return {};
    if (a > hi_ || a < lo_) {
      // Left the range while turning: finish on the bound in parameter mode.
      mode_ = Mode::param;
      dir_ = a > hi_ ? 1 : -1;
      return attempt_param(std::abs((dir_ > 0 ? hi_ : lo_) - chart_.back()) + 1.0);
    }
    push(a, res->second);
    Step step;
    step.accepted = true;
    step.iterations = res->second.iterations;
    return step;
  }

  // Predictor-corrector agreement in scaled coordinates (chart, E, c, x0):
  // the correction may not exceed half the predicted move (or the step).
  bool tracks(double a_pred, const Triple& pred, double a, const StationaryState& s, double h) const {
    const std::size_t n = chart_.size();
    if (n < 2) return true;
    const auto& p1 = last();
    if (branch_.points[n - 2].state.family != p1.family || s.family != p1.family) return true;
    const Triple sc = unknown_scales(p1);
    const double per = period_of(p1);
    auto dist = [&](double a1, const Triple& u, double a2, const Triple& w) {
      const double dc = log_c(p1) && u[1] * w[1] > 0.0 ? std::abs(std::log(u[1] / w[1])) : std::abs(u[1] - w[1]) / sc[1];
      return std::max({std::abs(a1 - a2), std::abs(u[0] - w[0]) / sc[0], dc,
                       std::abs(offset_delta(u[2], w[2], per)) / sc[2]});
    };
    const Triple corr{s.energy, s.c, s.x0};
    const double moved = dist(a_pred, pred, chart_.back(), {p1.energy, p1.c, p1.x0});
    // The floor keeps noisy secants (offsets of nearly flat profiles) from
    // stalling the step; a jump to another branch moves by far more.
    return dist(a, corr, a_pred, pred) <= 0.5 * std::max({moved, h, 1e-4});
  }

  // Branch-jump guard: |dE/da| within 10x the median over the recent
  // secants. A whole-branch median would reject the steep side of a ring.
  bool continuous(double a, const StationaryState& s) const {
    if (mode_ == Mode::energy) return true;
    const double da = std::abs(a - chart_.back());
    const double de = std::abs(s.energy - last().energy);
    std::vector<double> slopes;
    const std::size_t n = chart_.size();
    for (std::size_t i = n > 20 ? n - 20 : 1; i < n; ++i) {
      const double d = std::abs(chart_[i] - chart_[i - 1]);
      if (d > 0.0) slopes.push_back(std::abs(branch_.points[i].state.energy - branch_.points[i - 1].state.energy) / d);
    }
    if (slopes.size() < 5) return de <= 0.5 * (1.0 + std::abs(last().energy));
    const double bound = std::max(10.0 * median(slopes), 1e-3 * (1.0 + std::abs(last().energy)));
    return de <= bound * da;
  }

  // Normalized slope (dE/(1+|E|))/da of the last secant.
  double slope() const {
    const std::size_t n = chart_.size();
    const double da = chart_[n - 1] - chart_[n - 2];
    const double de = (branch_.points[n - 1].state.energy - branch_.points[n - 2].state.energy) /
                      (1.0 + std::abs(branch_.points[n - 1].state.energy));
    return da == 0.0 ? std::copysign(INFINITY, de) : de / da;
  }

  void update_mode() {
    if (!spec_.allow_turning || chart_.size() < 2) return;
    const auto fam = last().family;
    if (fam == SolutionFamily::Constant || fam == SolutionFamily::RationalZeroE_NegG) return;
    const double s = std::abs(slope());
    if (mode_ == Mode::param && s > 4.0) switch_mode();
    else if (mode_ == Mode::energy && s < 1.0) switch_mode();
  }

  void switch_mode() {
    const std::size_t n = chart_.size();
    if (mode_ == Mode::param) {
      mode_ = Mode::energy;
      const double de = branch_.points[n - 1].state.energy - branch_.points[n - 2].state.energy;
      energy_dir_ = de >= 0.0 ? 1 : -1;
      // A stalled parameter step means the energy keeps going the same way past the fold.
    } else {
      mode_ = Mode::param;
      const double da = chart_[n - 1] - chart_[n - 2];
      dir_ = da >= 0.0 ? 1 : -1;
    }
  }

  // Once a branch has turned it may legitimately pass back through the start
  // value (a ring straddling it), so the start side of the window opens up.
  void release_start_side() {
    const double open = axis_ == SweepAxis::t ? 2.0 * kPi : INFINITY;
    if (a_start_ == lo_) lo_ = a_start_ - open;
    else hi_ = a_start_ + open;
  }

  // At t = 1, v = 0 the level is the constant state, where families on either
  // side meet at c = q (g > 0) or the profile degenerates; step onto it.
  bool pass_flat_point() {
    if (axis_ == SweepAxis::g || flat_passed_) return false;
    if (axis_ == SweepAxis::v && last().defect.t_scale() != 1.0) return false;
    if (axis_ == SweepAxis::t && last().defect.v_strength() != 0.0) return false;
    const double a_flat = to_chart(axis_, axis_ == SweepAxis::v ? 0.0 : 1.0);
    const double ahead = (a_flat - chart_.back()) * (chart_.size() >= 2 ? (chart_.back() > chart_[chart_.size() - 2] ? 1 : -1) : dir_);
    if (!(ahead > 0.0) || ahead > spec_.initial_step || a_flat < lo_ || a_flat > hi_) return false;
    const StationaryState flat = constant_state(at_chart(last(), axis_, a_flat).defect, last().g);
    if (std::abs(flat.energy - last().energy) > 1e-2 * (1.0 + std::abs(last().energy))) return false;
    const auto out = solve(flat, spec_.solve);
    if (!out) return false;
    flat_passed_ = true;
    dir_ = a_flat > chart_.back() ? 1 : -1;
    push(a_flat, *out);
    return true;
  }

  // Walks c/q geometrically up to the boundary; true once within 1e-6.
  bool approach_boundary() {
    constexpr double kTarget = 1e-8;
    double gap = 1.0 - last().c / boundary_q(last());
    double shrink = 0.5;
    std::vector<double> log_gaps{std::log(std::max(gap, 1e-300))};
    std::size_t first = chart_.size() - 1;
    while (gap > kTarget) {
      if (std::abs(last().c - boundary_q(last())) <= 1e-6 * boundary_q(last()) && shrink > 0.95) break;
      const double next_gap = std::max(gap * shrink, 0.5 * kTarget);
      Triple guess{chart_.back(), last().energy, last().x0};
      const std::size_t n = chart_.size();
      if (n - first >= 2) {
        // Secant in log(gap).
        const auto& p0 = branch_.points[n - 2].state;
        const double w = (std::log(next_gap) - log_gaps.back()) / (log_gaps.back() - log_gaps[log_gaps.size() - 2]);
        guess[0] += w * (chart_[n - 1] - chart_[n - 2]);
        guess[1] += w * (last().energy - p0.energy);
        guess[2] += w * offset_delta(last().x0, p0.x0, period_of(last()));
      }
      const auto res = solve_fixed_ratio(last(), axis_, 1.0 - next_gap, guess, spec_.solve);
      const bool ok = res && res->second.state.family == last().family && res->first >= lo_ && res->first <= hi_ &&
                      std::abs(res->first - chart_.back()) <= spec_.initial_step;
      if (!ok) {
        shrink = 0.5 * (1.0 + shrink);
        if (shrink > 0.999) break;
        continue;
      }
      push(res->first, res->second);
      gap = next_gap;
      log_gaps.push_back(std::log(gap));
      shrink = std::max(0.1, shrink * 0.5);
    }
    return std::abs(last().c - boundary_q(last())) <= 1e-6 * boundary_q(last());
  }

  // After a turn, a pass back through the starting chart value near the
  // starting energy closes the ring: solve there and compare with the seed.
  bool closes_loop() {
    const std::size_t n = chart_.size();
    if (n < 6) return false;
    const double a_prev = chart_[n - 2];
    const double a_now = chart_[n - 1];
    if ((a_prev - a_start_) * (a_now - a_start_) > 0.0) return false;
    const auto& first = branch_.points.front().state;
    const double e_tol = 0.1 * (1.0 + std::abs(first.energy));
    if (std::abs(last().energy - first.energy) > e_tol) return false;
    StationaryState guess = at_chart(last(), axis_, a_start_);
    const auto out = solve(guess, spec_.solve);
    if (!out || !same_state(out->state, first, 1e-6)) return false;
    push(a_start_, *out);
    return true;
  }

  const SweepSpec& spec_;
  SweepAxis axis_;
  double a_start_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  int dir_ = 1;
  int energy_dir_ = 1;
  Mode mode_ = Mode::param;
  Branch branch_;
  std::vector<double> chart_;
  bool flat_passed_ = false;
};

void validate(const SweepSpec& spec) {
  if (!(spec.min_step > 0.0)) throw DomainError("SweepSpec: min_step must be positive");
  if (!(spec.initial_step >= spec.min_step)) throw DomainError("SweepSpec: initial_step must be at least min_step");
  if (!std::isfinite(spec.start) || !std::isfinite(spec.end) || spec.start == spec.end) {
    throw DomainError("SweepSpec: range must be finite and non-degenerate");
  }
  if (spec.max_points_per_branch < 2) throw DomainError("SweepSpec: max_points_per_branch must be at least 2");
}

}  // namespace

std::vector<StationaryState> linear_seeds(const DefectParams& params, int n) {
  if (n <= 0) return {};
  std::vector<StationaryState> out;
  if (params.t_scale() == 1.0 && params.v_strength() == 0.0) out.push_back(constant_state(params, 0.0));
  // A few spare levels in case deep bound states are not representable.
  const auto levels = linear_spectrum(params, n + 2);
  for (const auto& level : levels) {
    if (static_cast<int>(out.size()) >= n) break;
    try {
      out.push_back(linear_state(level, params));
    } catch (const NumericalError&) {
    }
  }
  return out;
}

Branch continue_branch(const StationaryState& seed, const SweepSpec& spec) {
  validate(spec);
  Tracker tracker(spec);
  return tracker.run(seed);
}

std::vector<Branch> sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<StationaryState> seeds = spec.seeds;
  if (seeds.empty()) {
    if (spec.axis != SweepAxis::g || spec.start != 0.0 || spec.linear_levels <= 0) {
      throw DomainError("sweep: seeds are required unless sweeping g from 0 with linear_levels > 0");
    }
    seeds = linear_seeds(DefectParams(spec.t, spec.v, spec.length), spec.linear_levels);
  }
  for (auto& s : seeds) {
    DefectParams d(spec.axis == SweepAxis::t ? s.defect.t_scale() : spec.t, spec.axis == SweepAxis::v ? s.defect.v_strength() : spec.v,
                   spec.length);
    s.defect = d;
    if (spec.axis != SweepAxis::g) s.g = spec.g;
  }

  std::vector<std::optional<Branch>> results(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        results[i] = continue_branch(seeds[i], spec);
      } catch (const NumericalError&) {
      }
    }
  };
  const int threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(seeds.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<Branch> out;
  for (auto& r : results) {
    if (!r) continue;
    const auto& s = r->points.front().state;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Branch& b) {
      return same_state(b.points.front().state, s, 1e-6);
    });
    if (!dup) out.push_back(std::move(*r));
  }
  if (out.empty()) throw DomainError("sweep: no seed converges at the start of the range");
  return out;
}

StationaryState scaling_family(const StationaryState& state, int n) {
  if (n <= 0) throw DomainError("scaling_family: n must be positive");
  if (state.defect.t_scale() != 1.0 || state.defect.v_strength() != 0.0) {
    throw DomainError("scaling_family: only defined for the free connection t = 1, v = 0");
  }
  const double n2 = static_cast<double>(n) * n;
  StationaryState out = state;
  out.g *= n2;
  out.energy *= n2;
  out.c *= n2;
  out.x0 /= n;
  return reduce_offset(out);
}

std::vector<StationaryState> levels_at(const DefectParams& params, double g, int n, const SolveConfig& config) {
  const auto seeds = linear_seeds(params, n + 2);
  std::vector<StationaryState> out;
  if (g == 0.0) {
    out = seeds;
  } else {
    SweepSpec spec;
    spec.axis = SweepAxis::g;
    spec.start = 0.0;
    spec.end = g;
    spec.initial_step = 0.25;
    spec.t = params.t_scale();
    spec.v = params.v_strength();
    spec.length = params.ring_length();
    spec.seeds = seeds;
    spec.allow_turning = false;
    spec.solve = config;
    for (const auto& b : sweep(spec)) {
      if (b.termination == Termination::range_end) out.push_back(b.points.back().state);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  if (static_cast<int>(out.size()) > n) out.resize(n);
  return out;
}

std::vector<StationaryState> family_census(const DefectParams& params, double g, SolutionFamily family,
                                           const std::vector<double>& energies, const SolveConfig& config) {
  std::vector<StationaryState> found;
  const double length = params.ring_length();
  for (double e : energies) {
    const double q = g != 0.0 ? e * e / (4.0 * g) : 0.0;
    for (double r : {0.02, 0.2, 0.5, 0.9, -0.02, -0.2, -0.5, -0.9}) {
      for (int k = 0; k < 16; ++k) {
        StationaryState guess;
        guess.family = family;
        guess.g = g;
        guess.defect = params;
        guess.energy = e;
        guess.c = r * q;
        guess.x0 = length * k / 16.0;
        if (!is_admissible(guess)) continue;
        const auto out = solve(guess, config);
        if (!out) continue;
        const bool seen = std::any_of(found.begin(), found.end(),
                                      [&](const StationaryState& f) { return same_state(f, out->state, 1e-6); });
        if (!seen) found.push_back(out->state);
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  return found;
}

namespace {

StationaryState flipped(StationaryState s) {
  s.eta0 = s.eta0 == 0.0 ? kPi : 0.0;
  return s;
}

// Solution for `defect` near `prev`, Newton from the guess (E, c, x0) first
// and shooting from prev's data at x = 0 when that fails.
std::optional<SolveOutcome> solve_at(const StationaryState& prev, const DefectParams& defect, const Triple& guess,
                                     const SolveConfig& config) {
  StationaryState s = prev;
  s.defect = defect;
  s.energy = guess[0];
  s.c = guess[1];
  s.x0 = guess[2];
  if (s.family == SolutionFamily::Constant) s.c = s.g != 0.0 ? s.energy * s.energy / (4.0 * s.g) : 0.0;
  std::optional<SolveOutcome> out;
  if (is_admissible(s)) out = solve(s, config);
  if (!out) {
    StationaryState target = prev;
    target.defect = defect;
    out = reclassify(prev, target, config);
  }
  return out;
}

// Follows `start` through params(tau) for tau over `nodes`, splitting steps
// that fail or jump levels. Each state is signed to overlap positively with
// its predecessor, so the sign is carried continuously.
std::vector<StationaryState> follow_path(const StationaryState& start, const std::function<DefectParams(double)>& params,
                                         const std::vector<double>& nodes, const SolveConfig& config) {
  std::vector<StationaryState> out{start};
  std::vector<double> taus{nodes.front()};
  const double min_step = std::abs(nodes.back() - nodes.front()) * std::ldexp(1.0, -16);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    double h = nodes[k] - taus.back();
    while (taus.back() != nodes[k]) {
      const double tau = std::abs(h) >= std::abs(nodes[k] - taus.back()) ? nodes[k] : taus.back() + h;
      const auto& p1 = out.back();
      Triple pred{p1.energy, p1.c, p1.x0};
      if (out.size() >= 2 && out[out.size() - 2].family == p1.family) {
        const auto& p0 = out[out.size() - 2];
        const double w = (tau - taus.back()) / (taus.back() - taus[taus.size() - 2]);
        pred = {p1.energy + w * (p1.energy - p0.energy), extrapolate_c(p0, p1, w),
                p1.x0 + w * offset_delta(p1.x0, p0.x0, period_of(p1))};
      }
      const auto res = solve_at(p1, params(tau), pred, config);
      const double allowed = std::max(0.5 * std::abs(pred[0] - p1.energy), 2e-3 * (1.0 + std::abs(p1.energy)));
      if (res && std::abs(res->state.energy - pred[0]) <= allowed) {
        StationaryState next = res->state;
        if (overlap(p1, next) < 0.0) next = flipped(next);
        out.push_back(next);
        taus.push_back(tau);
        h *= 2.0;
        continue;
      }
      h *= 0.5;
      if (std::abs(h) < min_step) throw NumericalError("follow_path: step underflow while following a level");
    }
  }
  return out;
}

}  // namespace

HolonomyReport berry_loop(std::pair<double, double> center, double radius, double g, const StationaryState& seed,
                          int n_points, const SolveConfig& config) {
  if (n_points < 4) throw DomainError("berry_loop: n_points must be at least 4");
  if (!(radius > 0.0)) throw DomainError("berry_loop: radius must be positive");
  const double sc = to_chart(SweepAxis::t, center.first);
  if ((sc - radius) * (sc + radius) <= 0.0) throw DomainError("berry_loop: the loop crosses t = 0");
  const double length = seed.defect.ring_length();
  auto params = [&](double theta) {
    return DefectParams(from_chart(SweepAxis::t, sc + radius * std::cos(theta)), center.second + radius * std::sin(theta),
                        length);
  };
  StationaryState s0 = seed;
  s0.g = g;
  const auto first = solve_at(s0, params(0.0), {s0.energy, s0.c, s0.x0}, config);
  if (!first) throw NumericalError("berry_loop: seed does not converge at the start of the loop");

  std::vector<double> nodes(static_cast<std::size_t>(n_points) + 1);
  for (int k = 0; k <= n_points; ++k) nodes[static_cast<std::size_t>(k)] = 2.0 * kPi * k / n_points;
  const auto states = follow_path(first->state, params, nodes, config);

  const auto& a = states.front();
  const auto& b = states.back();
  if (std::abs(a.energy - b.energy) > 1e-6 * (1.0 + std::abs(a.energy)) ||
      std::abs(a.c - b.c) > 1e-6 * (1.0 + std::abs(a.c))) {
    throw NumericalError("berry_loop: the level did not return to itself");
  }
  HolonomyReport report;
  report.loop_kind = LoopKind::berry_loop_tv;
  report.sign_factor = overlap(a, b) > 0.0 ? 1 : -1;
  for (const auto& s : states) {
    report.path.emplace_back(s.defect.t_scale(), s.defect.v_strength());
    report.energies.push_back(s.energy);
  }
  report.loop_description = "circle of radius " + std::to_string(radius) + " in (2 atan t, v) about (t, v) = (" +
                            std::to_string(center.first) + ", " + std::to_string(center.second) + ")";
  return report;
}

std::vector<double> dirichlet_spectrum(double g, int n, double length, const SolveConfig& config) {
  if (n <= 0) return {};
  if (!(length > 0.0)) throw DomainError("dirichlet_spectrum: length must be positive");
  SolveConfig cfg = config;
  cfg.tol_residual = config.shooting_tol_residual;
  std::vector<double> out;
  for (int j = 1; j <= n; ++j) {
    // sin(j pi x / L) at unit mass, then continued in g.
    const double k = j * kPi / length;
    Triple u{k * k, std::sqrt(2.0 / length) * k, 0.0};
    double g_now = 0.0;
    double dg = g == 0.0 ? 0.0 : std::copysign(std::min(0.5, std::abs(g)), g);
    while (true) {
      const double g_next = std::abs(dg) >= std::abs(g - g_now) ? g : g_now + dg;
      NewtonProblem problem;
      problem.residual = [&](const Triple& w) -> std::optional<Triple> {
        try {
          const Shot shot = shoot(g_next, w[0], 0.0, w[1], length, cfg.shooting_steps);
          return Triple{shot.psi, shot.mass - 1.0, 0.0};
        } catch (const NumericalError&) {
          return std::nullopt;
        }
      };
      problem.scales = {1.0 + std::abs(u[0]), 1.0 + std::abs(u[1]), 1.0};
      problem.free = {true, true, false};
      const NewtonResult nr = damped_newton(problem, u, cfg);
      if (nr.status == SolveStatus::converged) {
        u = nr.point;
        g_now = g_next;
        if (g_now == g) break;
        continue;
      }
      dg *= 0.5;
      if (std::abs(dg) < 1e-6) throw NumericalError("dirichlet_spectrum: continuation in g failed");
    }
    out.push_back(u[0]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

HolonomyReport exotic_cycle(double t_fixed, double v_magnitude, double g, int n_levels, const ExoticOptions& options,
                            const SolveConfig& config) {
  if (n_levels < 2) throw DomainError("exotic_cycle: n_levels must be at least 2");
  if (!(options.bound_state_start < 0.0) || !(v_magnitude > -options.bound_state_start)) {
    throw DomainError("exotic_cycle: need bound_state_start < 0 and v_magnitude > |bound_state_start|");
  }
  const DefectParams start(t_fixed, options.bound_state_start);
  const double length = start.ring_length();
  const auto levels = levels_at(start, g, n_levels, config);
  if (static_cast<int>(levels.size()) < n_levels) throw NumericalError("exotic_cycle: not enough levels at the start");
  // The bound state sits near -(v/2)^2; anything above -v^2/8 is an extended level.
  const double bound_ceiling = -0.125 * options.bound_state_start * options.bound_state_start;
  if (!(levels[0].energy < bound_ceiling) || !(levels[1].energy > bound_ceiling)) {
    throw NumericalError("exotic_cycle: level 0 at the start is not the defect-bound state");
  }

  auto carry = [&](const StationaryState& seed, double from, double to) {
    SweepSpec spec;
    spec.axis = SweepAxis::v;
    spec.start = from;
    spec.end = to;
    spec.initial_step = options.initial_step;
    spec.g = g;
    spec.t = t_fixed;
    spec.length = length;
    spec.solve = config;
    const Branch b = continue_branch(seed, spec);
    if (b.termination != Termination::range_end) {
      throw NumericalError("exotic_cycle: a level at E = " + std::to_string(seed.energy) + " stops at v = " +
                           std::to_string(b.points.back().state.defect.v_strength()) + " (" + std::string(to_string(b.termination)) +
                           ") instead of reaching v = " + std::to_string(to));
    }
    return b.points.back().state;
  };

  const std::size_t n = levels.size();
  const double lo = -v_magnitude;
  const double hi = v_magnitude;
  std::vector<StationaryState> at_lo(n);
  std::vector<StationaryState> at_end(n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool.emplace_back([&, i] {
      try {
        // The bound state is not representable at -V; it keeps its label.
        at_lo[i] = i == 0 ? levels[0] : carry(levels[i], options.bound_state_start, lo);
        const StationaryState up = carry(levels[i], options.bound_state_start, hi);
        at_end[i] = options.round_trip ? carry(up, hi, i == 0 ? options.bound_state_start : lo) : up;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  HolonomyReport report;
  report.loop_kind = LoopKind::exotic_v_cycle;
  report.path = {{t_fixed, lo}, {t_fixed, hi}};
  if (options.round_trip) report.path.emplace_back(t_fixed, lo);
  for (std::size_t i = 0; i < n; ++i) {
    report.energies.push_back(at_lo[i].energy);
    report.final_energies.push_back(at_end[i].energy);
  }
  // Levels at +-V sit O(1/V) away from the Dirichlet ones, on either side.
  const double rel = std::max(1e-4, 8.0 / (v_magnitude * length));
  for (std::size_t i = 0; i < n; ++i) {
    const double e = at_end[i].energy;
    int best = -1;
    double best_d = INFINITY;
    for (std::size_t j = options.round_trip ? 0 : 1; j < n; ++j) {
      const double d = std::abs(e - at_lo[j].energy);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    const double tol = options.round_trip ? 1e-6 * (1.0 + std::abs(e)) : 2.0 * rel * (1.0 + std::abs(e));
    if (best >= 0 && best_d <= tol) {
      report.permutation[static_cast<int>(i)] = best;
      if (best != static_cast<int>(i)) report.shifted_levels.push_back(static_cast<int>(i));
    }
  }

  const auto dirichlet = dirichlet_spectrum(g, static_cast<int>(n) + 2, length, config);
  auto deviation = [&](double e) {
    double d = INFINITY;
    for (double dj : dirichlet) d = std::min(d, std::abs(e - dj) / (1.0 + std::abs(e)));
    return d;
  };
  for (std::size_t i = 1; i < n; ++i) report.dirichlet_deviation = std::max(report.dirichlet_deviation, deviation(at_lo[i].energy));
  if (!options.round_trip) {
    for (std::size_t i = 0; i < n; ++i) {
      report.dirichlet_deviation = std::max(report.dirichlet_deviation, deviation(at_end[i].energy));
    }
  }
  report.dirichlet_limit_ok = report.dirichlet_deviation <= rel;
  report.loop_description = "t = " + std::to_string(t_fixed) + ", v from " + std::to_string(lo) + " to " +
                            std::to_string(hi) +
                            (options.round_trip ? " and back" : ", closed through v = +-inf (Dirichlet ring)");
  return report;
}

namespace {

// A stretch of one branch on which the chart value is strictly monotone,
// stored in increasing chart order.
struct Segment {
  int branch = 0;
  std::vector<double> a;
  std::vector<const StationaryState*> states;

  double energy_at(double x) const {
    const auto it = std::upper_bound(a.begin(), a.end(), x);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - a.begin()), 1, a.size() - 1);
    const double w = (x - a[k - 1]) / (a[k] - a[k - 1]);
    return states[k - 1]->energy + w * (states[k]->energy - states[k - 1]->energy);
  }

  // Re-solved energy at x, from the interpolated neighbours; falls back to
  // interpolation when the solve fails.
  double solved_energy_at(double x, SweepAxis axis, const SolveConfig& config) const {
    const auto it = std::upper_bound(a.begin(), a.end(), x);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - a.begin()), 1, a.size() - 1);
    const StationaryState& s0 = *states[k - 1];
    const StationaryState& s1 = *states[k];
    const double w = (x - a[k - 1]) / (a[k] - a[k - 1]);
    const StationaryState& near = w < 0.5 ? s0 : s1;
    try {
      StationaryState guess = at_chart(near, axis, x);
      if (s0.family == s1.family) {
        guess.energy = s0.energy + w * (s1.energy - s0.energy);
        guess.c = extrapolate_c(s0, s1, w - 1.0);
        guess.x0 = s0.x0 + w * offset_delta(s1.x0, s0.x0, period_of(s0));
        guess = at_chart(guess, axis, x);
      }
      std::optional<SolveOutcome> out;
      if (is_admissible(guess)) out = solve(guess, config);
      if (!out) out = reclassify(near, guess, config);
      if (out && std::abs(out->state.energy - energy_at(x)) <= 1e-2 * (1.0 + std::abs(energy_at(x)))) {
        return out->state.energy;
      }
    } catch (const std::exception&) {
    }
    return energy_at(x);
  }
};

std::vector<Segment> monotone_segments(const std::vector<Branch>& branches, SweepAxis axis) {
  std::vector<Segment> out;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& pts = branches[b].points;
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
      Segment seg;
      seg.branch = static_cast<int>(b);
      int dir = 0;
      std::size_t j = i;
      seg.a.push_back(to_chart(axis, pts[i].axis_value));
      seg.states.push_back(&pts[i].state);
      for (j = i + 1; j < pts.size(); ++j) {
        const double a = to_chart(axis, pts[j].axis_value);
        const double d = a - seg.a.back();
        // A jump across t = +-inf or a reversal ends the segment.
        if (d == 0.0 || std::abs(d) > kPi) break;
        const int sgn = d > 0.0 ? 1 : -1;
        if (dir != 0 && sgn != dir) break;
        dir = sgn;
        seg.a.push_back(a);
        seg.states.push_back(&pts[j].state);
      }
      if (seg.a.size() >= 2) {
        if (dir < 0) {
          std::reverse(seg.a.begin(), seg.a.end());
          std::reverse(seg.states.begin(), seg.states.end());
        }
        out.push_back(std::move(seg));
      }
      i = std::max(i + 1, j - 1);
    }
  }
  return out;
}

}  // namespace

std::vector<Degeneracy> detect_degeneracies(const std::vector<Branch>& branches, double tol, SweepAxis axis,
                                            const SolveConfig& config) {
  if (!(tol >= 0.0)) throw DomainError("detect_degeneracies: tol must be non-negative");
  const auto segs = monotone_segments(branches, axis);
  std::vector<Degeneracy> out;

  // No third segment strictly between the pair at x.
  auto adjacent = [&](std::size_t p, std::size_t q, double x) {
    const double e1 = segs[p].energy_at(x);
    const double e2 = segs[q].energy_at(x);
    const double lo = std::min(e1, e2);
    const double hi = std::max(e1, e2);
    for (std::size_t r = 0; r < segs.size(); ++r) {
      if (r == p || r == q || x < segs[r].a.front() || x > segs[r].a.back()) continue;
      const double e = segs[r].energy_at(x);
      if (e > lo && e < hi) return false;
    }
    return true;
  };
  auto record = [&](std::size_t p, std::size_t q, double x, double gap, bool crossing) {
    const double value = from_chart(axis, x);
    for (const auto& d : out) {
      if (std::abs(to_chart(axis, d.axis_value) - x) < 1e-6 &&
          d.level_pair == std::make_pair(std::min(segs[p].branch, segs[q].branch), std::max(segs[p].branch, segs[q].branch))) {
        return;
      }
    }
    out.push_back({value, {std::min(segs[p].branch, segs[q].branch), std::max(segs[p].branch, segs[q].branch)}, gap, crossing});
  };

  for (std::size_t p = 0; p < segs.size(); ++p) {
    for (std::size_t q = p + 1; q < segs.size(); ++q) {
      if (segs[p].branch == segs[q].branch) continue;
      const double lo = std::max(segs[p].a.front(), segs[q].a.front());
      const double hi = std::min(segs[p].a.back(), segs[q].a.back());
      if (!(hi > lo)) continue;
      std::vector<double> grid{lo, hi};
      for (const auto* seg : {&segs[p], &segs[q]}) {
        for (double x : seg->a) {
          if (x > lo && x < hi) grid.push_back(x);
        }
      }
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      std::vector<double> gap(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) gap[k] = segs[p].energy_at(grid[k]) - segs[q].energy_at(grid[k]);

      auto solved_gap = [&](double x) {
        return segs[p].solved_energy_at(x, axis, config) - segs[q].solved_energy_at(x, axis, config);
      };
      for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (!(gap[k] * gap[k + 1] < 0.0 || (gap[k + 1] == 0.0 && gap[k] != 0.0))) continue;
        double xa = grid[k];
        double xb = grid[k + 1];
        double ga = solved_gap(xa);
        double xm = 0.5 * (xa + xb);
        double gm = solved_gap(xm);
        for (int it = 0; it < 80 && xb - xa > 1e-14 && gm != 0.0; ++it) {
          if ((ga < 0.0) == (gm < 0.0)) {
            xa = xm;
            ga = gm;
          } else {
            xb = xm;
          }
          xm = 0.5 * (xa + xb);
          gm = solved_gap(xm);
        }
        if (adjacent(p, q, xm)) record(p, q, xm, std::abs(gm), true);
      }
      for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
        const double g0 = std::abs(gap[k - 1]);
        const double g1 = std::abs(gap[k]);
        const double g2 = std::abs(gap[k + 1]);
        if (!(g1 < g0 && g1 <= g2) || gap[k - 1] * gap[k + 1] <= 0.0) continue;
        // Golden section on the re-solved |gap|.
        constexpr double kInvPhi = 0.6180339887498949;
        double xa = grid[k - 1];
        double xb = grid[k + 1];
        double x1 = xb - kInvPhi * (xb - xa);
        double x2 = xa + kInvPhi * (xb - xa);
        double f1 = std::abs(solved_gap(x1));
        double f2 = std::abs(solved_gap(x2));
        for (int it = 0; it < 60 && xb - xa > 1e-10; ++it) {
          if (f1 < f2) {
            xb = x2;
            x2 = x1;
            f2 = f1;
            x1 = xb - kInvPhi * (xb - xa);
            f1 = std::abs(solved_gap(x1));
          } else {
            xa = x1;
            x1 = x2;
            f1 = f2;
            x2 = xa + kInvPhi * (xb - xa);
            f2 = std::abs(solved_gap(x2));
          }
        }
        const double xm = f1 < f2 ? x1 : x2;
        const double gm = std::min(f1, f2);
        if (adjacent(p, q, xm)) record(p, q, xm, gm, gm <= tol);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Degeneracy& a, const Degeneracy& b) { return a.axis_value < b.axis_value; });
  return out;
}

}  // namespace ringnls

#include "ringnls/solver.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <sstream>

#include "ringnls/errors.hpp"

namespace ringnls {

namespace {

using Vec3 = Eigen::Vector3d;

StationaryState with_params(StationaryState s, const Vec3& p) {
  s.energy = p[0];
  s.c = p[1];
  s.x0 = p[2];
  // Without coupling the mass condition leaves E free; the flat level is E = 0.
  if (s.family == SolutionFamily::Constant && s.g == 0.0) s.energy = 0.0;
  if (s.family == SolutionFamily::Constant) s.c = s.g != 0.0 ? s.energy * s.energy / (4.0 * s.g) : 0.0;
  if (s.family == SolutionFamily::RationalZeroE_NegG) s.energy = s.c = 0.0;
  return s;
}

std::optional<Vec3> try_residual(const StationaryState& s, const QuadratureConfig& q) {
  const auto r = guarded_residual(s, q);
  if (!r) return std::nullopt;
  return Vec3((*r)[0], (*r)[1], (*r)[2]);
}

StationaryState reduced(const StationaryState& s) {
  try {
    return reduce_offset(s);
  } catch (const DomainError&) {
    return s;  // outside the region; rejected by try_residual
  }
}

// Least-squares step on column-scaled unknowns; tiny singular directions are dropped.
Eigen::VectorXd min_norm_step(const Eigen::MatrixXd& jac, const Vec3& r) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
  cod.setThreshold(1e-9);
  return cod.solve(-r);
}

}  // namespace

Triple unknown_scales(const StationaryState& s) {
  const double e = 1.0 + std::abs(s.energy);
  return {e, std::max(std::abs(s.c), separatrix_at_zero_c(s.family) ? 1e-250 : 1e-2 * e), s.defect.ring_length()};
}

bool separatrix_at_zero_c(SolutionFamily family) {
  switch (family) {
    case SolutionFamily::DnBounded_NegG_NegE:
    case SolutionFamily::CnBounded_NegG_NegE:
    case SolutionFamily::SnInverse_PosG_NegE:
    case SolutionFamily::CnInverse_PosG_NegE:
    case SolutionFamily::LinearHyperbolic: return true;
    default: return false;
  }
}

std::array<bool, 3> free_unknowns(SolutionFamily family) {
  switch (family) {
    case SolutionFamily::RationalZeroE_NegG: return {false, false, true};
    case SolutionFamily::Constant: return {true, false, false};
    default: return {true, true, true};
  }
}

std::optional<Triple> guarded_residual(const StationaryState& s, const QuadratureConfig& q) {
  if (!is_admissible(s)) return std::nullopt;
  try {
    const Residual3 r = residual(s, q);
    const double w = boundary_row_weight(s.defect);
    const Triple v{w * r.bc_derivative, w * r.bc_value, r.mass_defect};
    for (double x : v) {
      if (!std::isfinite(x)) return std::nullopt;
    }
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double boundary_row_weight(const DefectParams& defect) { return 1.0 / std::max(1.0, std::abs(defect.t_scale())); }

double residual_norm(const StationaryState& state, const QuadratureConfig& config) {
  const auto r = guarded_residual(state, config);
  if (!r) return INFINITY;
  return std::sqrt((*r)[0] * (*r)[0] + (*r)[1] * (*r)[1] + (*r)[2] * (*r)[2]);
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::left_admissible_region: return "left_admissible_region";
    case SolveStatus::max_iterations: return "max_iterations";
  }
  return "?";
}

SolveOutcome newton_solve(SolutionFamily family, const DefectParams& params, double g, const Guess& guess,
                          const SolveConfig& config) {
  StationaryState seed;
  seed.family = family;
  seed.defect = params;
  seed.g = g;
  seed.energy = guess.energy;
  seed.c = guess.c;
  seed.x0 = guess.x0;
  return newton_solve(seed, config);
}

NewtonResult damped_newton(const NewtonProblem& problem, const Triple& start, const SolveConfig& config) {
  if (!(config.tol_residual > 0.0) || !(config.fd_step > 0.0)) throw DomainError("SolveConfig: tolerances must be positive");
  auto eval = [&](const Vec3& p) -> std::optional<Vec3> {
    const auto r = problem.residual({p[0], p[1], p[2]});
    if (!r) return std::nullopt;
    Vec3 v((*r)[0], (*r)[1], (*r)[2]);
    if (!v.allFinite()) return std::nullopt;
    return v;
  };
  auto normalize = [&](const Vec3& p) -> Vec3 {
    if (!problem.normalize) return p;
    const Triple n = problem.normalize({p[0], p[1], p[2]});
    return Vec3(n[0], n[1], n[2]);
  };
  NewtonResult out;
  Vec3 p = normalize(Vec3(start[0], start[1], start[2]));
  out.point = {p[0], p[1], p[2]};
  auto r0 = eval(p);
  if (!r0) {
    out.status = SolveStatus::left_admissible_region;
    out.final_residual_norm = INFINITY;
    return out;
  }
  Vec3 r = *r0;
  std::vector<int> cols;
  for (int j = 0; j < 3; ++j) {
    if (problem.free[j]) cols.push_back(j);
  }
  // Once within tolerance, one more full step is kept if it lowers the
  // residual; the unknowns are then good to well below tol_residual.
  bool polishing = false;
  for (int iter = 0;; ++iter) {
    const double norm = r.norm();
    out.residual_history.push_back(norm);
    out.iterations = iter;
    out.final_residual_norm = norm;
    out.point = {p[0], p[1], p[2]};
    if (norm <= config.tol_residual) {
      out.status = SolveStatus::converged;
      if (polishing || norm == 0.0) return out;
      polishing = true;
    }
    if (!polishing && iter >= config.max_iterations) {
      out.status = SolveStatus::max_iterations;
      return out;
    }
    const auto& sc = problem.scales;
    Eigen::MatrixXd jac(3, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int j = cols[k];
      const double h = config.fd_step * std::max(std::abs(p[j]), sc[j]);
      Vec3 up = p;
      Vec3 dn = p;
      up[j] += h;
      dn[j] -= h;
      const auto ru = eval(up);
      const auto rd = eval(dn);
      // One-sided at a region edge.
      if (ru && rd) {
        jac.col(k) = (*ru - *rd) / (2.0 * h) * sc[j];
      } else if (ru) {
        jac.col(k) = (*ru - r) / h * sc[j];
      } else if (rd) {
        jac.col(k) = (r - *rd) / h * sc[j];
      } else {
        if (!polishing) out.status = SolveStatus::left_admissible_region;
        return out;
      }
    }
    const Eigen::VectorXd scaled = min_norm_step(jac, r);
    Vec3 step = Vec3::Zero();
    for (std::size_t k = 0; k < cols.size(); ++k) step[cols[k]] = scaled[k] * sc[cols[k]];
    if (!step.allFinite()) {
      if (!polishing) out.status = SolveStatus::diverged;
      return out;
    }
    double lambda = 1.0;
    bool accepted = false;
    bool full_step_left = false;
    const int backtracks = polishing ? 0 : config.max_backtracks;
    for (int b = 0; b <= backtracks; ++b, lambda *= config.damping) {
      const Vec3 trial = normalize(p + lambda * step);
      const auto rt = eval(trial);
      if (!rt) {
        if (b == 0) full_step_left = true;
        continue;
      }
      if (rt->norm() < norm) {
        p = trial;
        r = *rt;
        accepted = true;
        break;
      }
    }
    if (!accepted && polishing) return out;
    if (!accepted) {
      out.status = full_step_left ? SolveStatus::left_admissible_region : SolveStatus::diverged;
      return out;
    }
  }
}

SolveOutcome newton_solve(const StationaryState& seed, const SolveConfig& config) {
  StationaryState base = seed;
  if (base.family == SolutionFamily::Constant) base.x0 = 0.0;
  NewtonProblem problem;
  problem.residual = [&](const Triple& p) -> std::optional<Triple> {
    const auto r = try_residual(with_params(base, Vec3(p[0], p[1], p[2])), config.quadrature);
    if (!r) return std::nullopt;
    return Triple{(*r)[0], (*r)[1], (*r)[2]};
  };
  problem.scales = unknown_scales(base);
  problem.free = free_unknowns(base.family);
  problem.normalize = [&](const Triple& p) -> Triple {
    const StationaryState s = reduced(with_params(base, Vec3(p[0], p[1], p[2])));
    return {s.energy, s.c, s.x0};
  };
  const NewtonResult nr = damped_newton(problem, {base.energy, base.c, base.x0}, config);
  SolveOutcome out;
  out.status = nr.status;
  out.state = with_params(base, Vec3(nr.point[0], nr.point[1], nr.point[2]));
  out.iterations = nr.iterations;
  out.final_residual_norm = nr.final_residual_norm;
  out.residual_history = nr.residual_history;
  return out;
}

Shot shoot(double g, double energy, double psi0, double dpsi0, double length, int n_steps) {
  if (n_steps < 1) throw DomainError("shoot: n_steps must be positive");
  const double h = length / n_steps;
  // y = (psi, psi', accumulated mass)
  auto f = [&](const std::array<double, 3>& y) {
    return std::array<double, 3>{y[1], g * y[0] * y[0] * y[0] - energy * y[0], y[0] * y[0]};
  };
  std::array<double, 3> y{psi0, dpsi0, 0.0};
  for (int i = 0; i < n_steps; ++i) {
    const auto k1 = f(y);
    std::array<double, 3> tmp;
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    const auto k2 = f(tmp);
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    const auto k3 = f(tmp);
    for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h * k3[j];
    const auto k4 = f(tmp);
    for (int j = 0; j < 3; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    if (!(std::abs(y[0]) <= 1e8)) {
      std::ostringstream msg;
      msg << "shoot: |psi| exceeded 1e8 at x = " << (i + 1) * h << " (pole inside the ring)";
      throw NumericalError(msg.str());
    }
  }
  return {y[0], y[1], y[2]};
}

ShootingOutcome shooting_solve(const DefectParams& params, double g, double energy, double psi0, double dpsi0,
                               const SolveConfig& config) {
  const double length = params.ring_length();
  const double t = params.t_scale();
  const double v = params.v_strength();
  const double w = boundary_row_weight(params);
  auto res = [&](const Vec3& p) -> std::optional<Vec3> {
    try {
      const Shot s = shoot(g, p[0], p[1], p[2], length, config.shooting_steps);
      return Vec3(w * (s.psi - t * p[1]), w * (p[2] - t * s.dpsi - v * p[1]), s.mass - 1.0);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  };
  ShootingOutcome out;
  Vec3 p(energy, psi0, dpsi0);
  auto r0 = res(p);
  if (!r0) {
    out.status = SolveStatus::left_admissible_region;
    out.final_residual_norm = INFINITY;
    return out;
  }
  Vec3 r = *r0;
  for (int iter = 0;; ++iter) {
    const double norm = r.norm();
    out.iterations = iter;
    out.final_residual_norm = norm;
    out.energy = p[0];
    out.psi0 = p[1];
    out.dpsi0 = p[2];
    if (norm <= config.shooting_tol_residual) {
      out.status = SolveStatus::converged;
      return out;
    }
    if (iter >= config.max_iterations) {
      out.status = SolveStatus::max_iterations;
      return out;
    }
    const std::array<double, 3> sc{1.0 + std::abs(p[0]), std::max(std::abs(p[1]), 0.1),
                                   std::max(std::abs(p[2]), 0.1)};
    Eigen::MatrixXd jac(3, 3);
    for (int j = 0; j < 3; ++j) {
      const double h = config.fd_step * sc[j];
      Vec3 up = p;
      Vec3 dn = p;
      up[j] += h;
      dn[j] -= h;
      const auto ru = res(up);
      const auto rd = res(dn);
      if (!ru || !rd) {
        out.status = SolveStatus::diverged;
        return out;
      }
      jac.col(j) = (*ru - *rd) / (2.0 * h) * sc[j];
    }
    const Eigen::VectorXd scaled = min_norm_step(jac, r);
    Vec3 step;
    for (int j = 0; j < 3; ++j) step[j] = scaled[j] * sc[j];
    double lambda = 1.0;
    bool accepted = false;
    for (int b = 0; b <= config.max_backtracks; ++b, lambda *= config.damping) {
      const Vec3 trial = p + lambda * step;
      const auto rt = res(trial);
      if (rt && rt->norm() < norm) {
        p = trial;
        r = *rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.status = SolveStatus::diverged;
      return out;
    }
  }
}

}  // namespace ringnls

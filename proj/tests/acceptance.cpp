// One line per acceptance criterion; exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "ringnls/continuation.hpp"
#include "ringnls/elliptic.hpp"
#include "ringnls/linear.hpp"
#include "ringnls/solver.hpp"

using namespace ringnls;

namespace {

constexpr double kPi = std::numbers::pi;
using F = SolutionFamily;

struct Verdict {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

int failures = 0;

void criterion(int n, const std::function<void(Verdict&)>& body) {
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.ok = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  if (!v.ok) ++failures;
  std::printf("criterion %d: %s%s\n", n, v.ok ? "PASS" : "FAIL", v.detail.str().c_str());
  std::fflush(stdout);
}

SweepSpec t_sweep(double g, double v, double t0, double t1) {
  SweepSpec spec;
  spec.axis = SweepAxis::t;
  spec.start = t0;
  spec.end = t1;
  spec.g = g;
  spec.v = v;
  spec.threads = 4;
  return spec;
}

bool has_family(const Branch& b, F f) {
  return std::find(b.family_history.begin(), b.family_history.end(), f) != b.family_history.end();
}

// Smallest |E_a - E_b| over points of `a` lying inside a segment of `b`.
double min_gap(const Branch& a, const Branch& b) {
  double best = INFINITY;
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    const double a0 = b.points[i - 1].axis_value;
    const double a1 = b.points[i].axis_value;
    if (a0 == a1) continue;
    for (const auto& p : a.points) {
      const double x = p.axis_value;
      if ((x - a0) * (x - a1) > 0) continue;
      const double w = (x - a0) / (a1 - a0);
      const double e = b.points[i - 1].state.energy + w * (b.points[i].state.energy - b.points[i - 1].state.energy);
      best = std::min(best, std::abs(e - p.state.energy));
    }
  }
  return best;
}

void linear_levels(Verdict& v) {
  const Clock clock;
  const auto lv = linear_spectrum(DefectParams(1.0, 0.0), 6);
  const double secs = clock.seconds();
  const double expect[] = {1, 1, 4, 4, 9, 9};
  double worst = 0.0;
  v.require(lv.size() == 6, "six levels");
  for (std::size_t i = 0; i < lv.size() && i < 6; ++i) worst = std::max(worst, std::abs(lv[i].energy - expect[i]));
  v.detail << " max |E - n^2| = " << worst << " in " << secs << " s";
  v.require(worst < 1e-9, "levels within 1e-9");
  v.require(secs < 1.0, "under 1 s");
}

void constant_state_energy(Verdict& v) {
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double g = -10.0 + 0.5 * i;
    const double exact = g / kTwoPi;
    const auto out = newton_solve(F::Constant, DefectParams(1.0, 0.0), g, Guess{exact + 0.05, 0.0, 0.0});
    v.require(out.status == SolveStatus::converged, "converged at g = " + std::to_string(g));
    worst = std::max(worst, std::abs(out.state.energy - exact));
  }
  v.detail << " max |E - g/2pi| = " << worst << " over 41 couplings";
  v.require(worst < 1e-10, "within 1e-10");
}

void scaling(Verdict& v) {
  const Clock clock;
  std::vector<StationaryState> states = levels_at(DefectParams(1.0, 0.0), 3.0, 5);
  for (const auto& s : levels_at(DefectParams(1.0, 0.0), -3.0, 5)) states.push_back(s);
  v.require(states.size() == 10, "ten states");
  double worst = 0.0;
  for (const auto& s : states) {
    for (int n : {2, 3}) worst = std::max(worst, residual_norm(scaling_family(s, n), SolveConfig{}.quadrature));
  }
  const double secs = clock.seconds();
  v.detail << " " << states.size() << " states, max residual " << worst << " in " << secs << " s";
  v.require(worst < 1e-8, "residual below 1e-8");
  v.require(secs < 10.0, "under 10 s");
}

void dual_solvers(Verdict& v) {
  const Clock clock;
  constexpr F families[] = {F::SnBounded_PosG_PosE, F::SnInverse_PosG_PosE, F::CnInverse_PosG_PosE,
                            F::SnBounded_PosG_NegE, F::SnInverse_PosG_NegE, F::CnInverse_PosG_NegE,
                            F::SnBounded_NegG_PosE, F::CnBounded_NegG_NegE, F::DnBounded_NegG_NegE,
                            F::LinearTrig,          F::LinearHyperbolic,    F::Constant};
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  double worst_e = 0.0, worst_psi = 0.0;
  int count = 0;
  for (int i = 0; i < 50; ++i) {
    const F f = families[i % std::size(families)];
    const StationaryState exact = gen::family_solution(f, rng);
    // Small kick: near-pole profiles have narrow Newton basins.
    StationaryState guess = exact;
    guess.energy += 1e-6 * (1 + std::abs(exact.energy)) * jitter(rng);
    if (f != F::Constant) guess.c += 1e-6 * std::abs(exact.c) * jitter(rng);
    guess.x0 += 1e-6 * jitter(rng);
    const auto out = newton_solve(guess);
    if (out.status != SolveStatus::converged) {
      v.require(false, std::string("elliptic solve for ") + std::string(to_string(f)));
      continue;
    }
    const StationaryState& s = out.state;
    const auto shot = shooting_solve(s.defect, s.g, s.energy * (1 + 1e-7), eval_psi(s, 0.0), eval_dpsi(s, 0.0));
    if (shot.status != SolveStatus::converged) {
      v.require(false, std::string("shooting solve for ") + std::string(to_string(f)));
      continue;
    }
    worst_e = std::max(worst_e, std::abs(shot.energy - s.energy) / std::max(1.0, std::abs(s.energy)));
    for (int k = 1; k <= 64; ++k) {
      const double x = kTwoPi * k / 64.0;
      const auto at = oracle::nls_by_rk4(s.g, shot.energy, shot.psi0, shot.dpsi0, x, 128 * k);
      worst_psi = std::max(worst_psi, std::abs(at[0] - eval_psi(s, x)) / std::max(1.0, std::abs(at[0])));
    }
    ++count;
  }
  const double secs = clock.seconds();
  v.detail << " " << count << " states, max rel dE " << worst_e << ", max dpsi " << worst_psi << " in " << secs
           << " s";
  v.require(count == 50, "all 50 states solved");
  v.require(worst_e <= 1e-6, "energies within 1e-6");
  v.require(worst_psi <= 1e-7, "profiles within 1e-7");
  v.require(secs < 120.0, "under 2 min");
}

void degeneracies(Verdict& v) {
  for (double g : {-5.0, 0.0, 5.0}) {
    for (double sign : {1.0, -1.0}) {
      SweepSpec spec = t_sweep(g, 0.0, 0.5 * sign, 3.0 * sign);
      spec.seeds = levels_at(DefectParams(0.5 * sign, 0.0), g, 4);
      const auto deg = detect_degeneracies(sweep(spec), 1e-8);
      double gap = INFINITY;
      for (const auto& d : deg) {
        if (d.crossing && std::abs(d.axis_value - sign) < 1e-6) gap = std::min(gap, std::abs(d.gap));
      }
      v.require(gap < 1e-8, "crossing at t = " + std::to_string(sign) + ", g = " + std::to_string(g));
      v.detail << " g=" << g << " t=" << sign << " gap " << gap << ";";
    }
    for (double vs : {-1.0, 1.0}) {
      SweepSpec spec = t_sweep(g, vs, 0.5, 3.0);
      spec.seeds = levels_at(DefectParams(0.5, vs), g, 4);
      const auto deg = detect_degeneracies(sweep(spec), 1e-8);
      double gap = INFINITY;
      bool crossing_at_one = false;
      for (const auto& d : deg) {
        if (!d.crossing && d.gap > 0.0) gap = std::min(gap, d.gap);
        if (d.crossing && std::abs(d.axis_value - 1.0) < 0.05) crossing_at_one = true;
      }
      v.require(std::isfinite(gap) && gap > 1e-3, "avoided crossing at v = " + std::to_string(vs));
      v.require(!crossing_at_one, "no crossing near t = 1 at v = " + std::to_string(vs));
      v.detail << " g=" << g << " v=" << vs << " min gap " << gap << ";";
    }
  }
}

void disappearance(Verdict& v) {
  // At v = 0 the disappearing level is reached through t = inf.
  struct Case {
    double v, t0, t1;
    bool through;
  };
  for (const Case& c : {Case{-1.0, 0.5, 3.0, false}, Case{0.0, -0.5, 3.0, true}, Case{1.0, 0.5, 3.0, false}}) {
    SweepSpec spec = t_sweep(5.0, c.v, c.t0, c.t1);
    spec.through_infinity = c.through;
    spec.seeds = levels_at(DefectParams(c.t0, c.v), 5.0, 4);
    bool found = false;
    for (const auto& b : sweep(spec)) {
      if (b.termination != Termination::disappeared_at_admissibility_boundary) continue;
      const auto& s = b.points.back().state;
      const double q = s.energy * s.energy / (4.0 * s.g);
      if (std::abs(s.c - q) <= 1e-6 * q) {
        found = true;
        v.detail << " v=" << c.v << ": t=" << s.defect.t_scale() << " E=" << s.energy << " |c-q|/q="
                 << std::abs(s.c - q) / q << ";";
        break;
      }
    }
    v.require(found, "disappearance at v = " + std::to_string(c.v));
  }
}

void rings(Verdict& v) {
  const double g = -5.0;
  const double t0 = std::tan(0.75);
  for (double vs : {-0.3, 0.3}) {
    const DefectParams d(t0, vs);
    SweepSpec spec = t_sweep(g, vs, t0, std::tan(0.5 * (kPi - 1e-3)));
    spec.initial_step = 0.02;
    spec.seeds = levels_at(d, g, 4);
    const auto normal = sweep(spec);
    spec.seeds.clear();
    bool closed = false;
    for (const auto& s : family_census(d, g, F::DnBounded_NegG_NegE, {-0.8, -1.0, -1.3, -1.6})) {
      const Branch b = continue_branch(s, spec);
      if (b.termination != Termination::closed_loop || !has_family(b, F::DnBounded_NegG_NegE)) continue;
      double gap = INFINITY;
      for (const auto& n : normal) gap = std::min(gap, min_gap(b, n));
      v.detail << " v=" << vs << ": ring closes, gap to normal levels " << gap << ";";
      v.require(gap > 1e-3, "ring apart from normal levels at v = " + std::to_string(vs));
      closed = true;
      break;
    }
    v.require(closed, "closed dn ring at v = " + std::to_string(vs));
  }

  // On v = 0 the ring arc runs into the uniform state at t = 1, which is a
  // normal level there.
  const auto seeds = family_census(DefectParams(t0, 0.3), g, F::DnBounded_NegG_NegE, {-0.8});
  const auto upper = std::max_element(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) {
    return a.energy < b.energy;
  });
  v.require(upper != seeds.end(), "upper ring seed");
  if (upper == seeds.end()) return;
  SweepSpec down;
  down.axis = SweepAxis::v;
  down.start = 0.3;
  down.end = 0.0;
  down.g = g;
  down.t = t0;
  down.allow_turning = false;
  const Branch bv = continue_branch(*upper, down);
  v.require(bv.termination == Termination::range_end, "ring arc carried to v = 0");
  SweepSpec in = t_sweep(g, 0.0, t0, 1.0);
  in.initial_step = 0.02;
  const Branch bt = continue_branch(bv.points.back().state, in);
  const auto& s = bt.points.back().state;
  const double contact = std::abs(s.energy - g / kTwoPi);
  const auto lv = levels_at(DefectParams(1.0, 0.0), g, 2);
  const bool normal_has_it = std::any_of(lv.begin(), lv.end(), [&](const auto& l) {
    return std::abs(l.energy - g / kTwoPi) < 1e-10;
  });
  v.detail << " v=0: arc ends at t=" << s.defect.t_scale() << " with |E - g/2pi| = " << contact;
  v.require(std::abs(s.defect.t_scale() - 1.0) < 1e-9 && contact < 1e-8, "contact with the uniform level at v = 0");
  v.require(normal_has_it, "uniform state among the normal levels at t = 1, v = 0");
}

void berry(Verdict& v) {
  auto sign_at = [](double tc, double vc, double g, int level, int n) {
    const double s0 = 2.0 * std::atan(tc) + 0.2;
    const auto lv = levels_at(DefectParams(std::tan(0.5 * s0), vc), g, level + 1);
    return berry_loop({tc, vc}, 0.2, g, lv.at(level), n).sign_factor;
  };
  for (double g : {-5.0, 5.0}) {
    for (double tc : {-1.0, 1.0}) {
      const int a = sign_at(tc, 0.0, g, 1, 64);
      const int b = sign_at(tc, 0.0, g, 1, 128);
      v.detail << " (" << tc << ",0) g=" << g << ": " << a << "/" << b << ";";
      v.require(a == -1 && b == -1, "sign -1 around (" + std::to_string(tc) + ", 0) at g = " + std::to_string(g));
    }
    const int a = sign_at(3.0, 1.5, g, 0, 64);
    const int b = sign_at(3.0, 1.5, g, 0, 128);
    v.detail << " contractible g=" << g << ": " << a << "/" << b << ";";
    v.require(a == 1 && b == 1, "sign +1 on a contractible loop at g = " + std::to_string(g));
  }
}

void exotic(Verdict& v) {
  std::map<int, int> first;
  bool have_first = false;
  for (double g : {-5.0, 0.0, 5.0}) {
    const HolonomyReport r = exotic_cycle(1.0, 1000.0, g, 6);
    const bool nontrivial = std::any_of(r.permutation.begin(), r.permutation.end(),
                                        [](const auto& p) { return p.first != p.second; });
    v.detail << " g=" << g << ":";
    for (const auto& [from, to] : r.permutation) v.detail << " " << from << "->" << to;
    v.detail << ", Dirichlet deviation " << r.dirichlet_deviation << ";";
    v.require(nontrivial, "nontrivial map at g = " + std::to_string(g));
    v.require(r.dirichlet_limit_ok, "Dirichlet limit at g = " + std::to_string(g));
    if (!have_first) {
      first = r.permutation;
      have_first = true;
    } else {
      v.require(r.permutation == first, "same map at g = " + std::to_string(g));
    }
  }
}

void elliptic_identities(Verdict& v) {
  const Clock clock;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> udist(-10.0, 10.0);
  std::uniform_real_distribution<double> mdist(0.0, 1.0);
  const elliptic::Tolerances tol;
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = udist(rng);
    const double m = mdist(rng);
    const auto e = elliptic::jacobi(u, m);
    const double p1 = std::abs(e.sn * e.sn + e.cn * e.cn - 1.0);
    const double p2 = std::abs(e.dn * e.dn + m * e.sn * e.sn - 1.0);
    worst = std::max({worst, p1, p2});
    if (p1 > tol.identity || p2 > tol.identity) ++bad;
    const auto r = elliptic::jacobi(-u, m);
    if (r.sn != -e.sn || r.cn != e.cn || r.dn != e.dn) ++bad;
    if (m <= 0.99) {
      const double K = elliptic::complete_K(m);
      const auto p = elliptic::jacobi(u + 4.0 * K, m);
      const auto h = elliptic::jacobi(u + 2.0 * K, m);
      if (std::abs(p.sn - e.sn) > 1e-10 || std::abs(p.cn - e.cn) > 1e-10 || std::abs(h.dn - e.dn) > 1e-10) ++bad;
    }
  }
  const double secs = clock.seconds();
  v.detail << " " << bad << " failures, worst identity defect " << worst << " in " << secs << " s";
  v.require(bad == 0, "all points pass");
  v.require(secs < 5.0, "under 5 s");
}

}  // namespace

int main() {
  criterion(1, linear_levels);
  criterion(2, constant_state_energy);
  criterion(3, scaling);
  criterion(4, dual_solvers);
  criterion(5, degeneracies);
  criterion(6, disappearance);
  criterion(7, rings);
  criterion(8, berry);
  criterion(9, exotic);
  criterion(10, elliptic_identities);
  return failures == 0 ? 0 : 1;
}

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "ringnls/continuation.hpp"
#include "ringnls/errors.hpp"
#include "ringnls/linear.hpp"
#include "ringnls/solver.hpp"

namespace ringnls::cli {

using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string format = "csv";
  std::string output = "-";
  int threads = 0;
  double g = 0.0;
  double t = 1.0;
  double v = 0.0;
  double length = kTwoPi;
  int levels = 4;
  double step = 0.05;
  double g_min = 0.0;
  double g_max = 10.0;
  double t_start = 0.5;
  double t_end = 3.0;
  bool through_infinity = false;
  double v_start = -5.0;
  double v_end = 5.0;
  std::vector<double> center{1.0, 0.0};
  double radius = 0.2;
  int level = 1;
  int points = 64;
  double v_max = 1000.0;
  double bound_start = -40.0;
  bool round_trip = false;
  std::string input;
};

struct Result {
  std::string command;
  json parameters;
  std::vector<Branch> branches;
  std::string axis = "g";
  std::optional<HolonomyReport> holonomy;
  json table;  // verify / linear rows
  std::string text;  // verify summary line
  std::string error;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double residual_of(const StationaryState& s) {
  return residual_norm(s, SolveConfig{}.quadrature);
}

// --- writers -----------------------------------------------------------

void write_csv(const Result& r, std::ostream& os) {
  if (!r.table.is_null()) {
    const auto& rows = r.table;
    if (rows.empty()) return;
    std::vector<std::string> keys;
    for (const auto& [k, _] : rows.front().items()) keys.push_back(k);
    for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
    os << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto& cell = row.at(keys[i]);
        os << (i ? "," : "");
        if (cell.is_number_float()) os << num(cell.get<double>());
        else if (cell.is_string()) os << cell.get<std::string>();
        else os << cell.dump();
      }
      os << "\n";
    }
    return;
  }
  os << "branch_id,family,axis_value,t,v,g,E,c,x0,residual_norm,termination\n";
  for (std::size_t b = 0; b < r.branches.size(); ++b) {
    const auto& br = r.branches[b];
    const std::string term(to_string(br.termination));
    for (const auto& p : br.points) {
      const auto& s = p.state;
      os << b << ',' << to_string(s.family) << ',' << num(p.axis_value) << ',' << num(s.defect.t_scale()) << ','
         << num(s.defect.v_strength()) << ',' << num(s.g) << ',' << num(s.energy) << ',' << num(s.c) << ','
         << num(s.x0) << ',' << num(residual_of(s)) << ',' << term << "\n";
    }
  }
}

json holonomy_json(const HolonomyReport& h) {
  json j;
  j["loop_kind"] = std::string(to_string(h.loop_kind));
  j["loop_description"] = h.loop_description;
  if (h.loop_kind == LoopKind::berry_loop_tv) {
    j["sign_factor"] = h.sign_factor;
    json path = json::array();
    for (std::size_t i = 0; i < h.path.size(); ++i) {
      path.push_back({{"t", h.path[i].first}, {"v", h.path[i].second}, {"E", i < h.energies.size() ? h.energies[i] : NAN}});
    }
    j["path"] = path;
  } else {
    json perm = json::object();
    for (const auto& [from, to] : h.permutation) perm[std::to_string(from)] = to;
    j["permutation"] = perm;
    j["shifted_levels"] = h.shifted_levels;
    j["energies_start"] = h.energies;
    j["energies_end"] = h.final_energies;
    j["dirichlet_deviation"] = h.dirichlet_deviation;
    j["dirichlet_limit_ok"] = h.dirichlet_limit_ok;
  }
  return j;
}

json result_json(const Result& r) {
  json j;
  j["command"] = r.command;
  j["parameters"] = r.parameters;
  if (!r.branches.empty() || r.table.is_null()) {
    json branches = json::array();
    for (std::size_t b = 0; b < r.branches.size(); ++b) {
      const auto& br = r.branches[b];
      json jb;
      jb["branch_id"] = b;
      jb["termination"] = std::string(to_string(br.termination));
      json fams = json::array();
      for (auto f : br.family_history) fams.push_back(std::string(to_string(f)));
      jb["family_history"] = fams;
      json pts = json::array();
      for (const auto& p : br.points) {
        const auto& s = p.state;
        pts.push_back({{"family", std::string(to_string(s.family))},
                       {"axis_value", p.axis_value},
                       {"t", s.defect.t_scale()},
                       {"v", s.defect.v_strength()},
                       {"L", s.defect.ring_length()},
                       {"g", s.g},
                       {"E", s.energy},
                       {"c", s.c},
                       {"x0", s.x0},
                       {"eta0", s.eta0},
                       {"residual_norm", residual_of(s)}});
      }
      jb["points"] = pts;
      branches.push_back(jb);
    }
    j["branches"] = branches;
  }
  if (r.holonomy) j["holonomy"] = holonomy_json(*r.holonomy);
  if (!r.table.is_null() && !r.holonomy) j["rows"] = r.table;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

// Scaled energy used by the plots.
double scaled(double e) { return std::copysign(std::sqrt(std::abs(e)), e); }

class Svg {
 public:
  Svg(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1_ > x0_)) { x0_ -= 1.0; x1_ += 1.0; }
    if (!(y1_ > y0_)) { y0_ -= 1.0; y1_ += 1.0; }
    const double px = 0.04 * (x1_ - x0_);
    const double py = 0.04 * (y1_ - y0_);
    x0_ -= px; x1_ += px; y0_ -= py; y1_ += py;
  }

  double X(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kW - kLeft - kRight); }
  double Y(double y) const { return kH - kBottom - (y - y0_) / (y1_ - y0_) * (kH - kTop - kBottom); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
    if (pts.size() < 2) {
      for (const auto& [x, y] : pts) dot(x, y, color);
      return;
    }
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) body_ << X(x) << ',' << Y(y) << ' ';
    body_ << "\"/>\n";
  }

  void dot(double x, double y, const std::string& color) {
    body_ << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }

  void line(double xa, double ya, double xb, double yb, const std::string& color) {
    body_ << "<line x1=\"" << X(xa) << "\" y1=\"" << Y(ya) << "\" x2=\"" << X(xb) << "\" y2=\"" << Y(yb)
          << "\" stroke=\"" << color << "\" stroke-width=\"1.2\"/>\n";
  }

  std::string str(const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight << "\" height=\""
       << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0_ + (x1_ - x0_) * i / 4.0;
      const double yv = y0_ + (y1_ - y0_) * i / 4.0;
      os << "<text x=\"" << X(xv) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
      os << "<text x=\"" << kLeft - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
    }
    if (y0_ < 0.0 && y1_ > 0.0) {
      os << "<line x1=\"" << kLeft << "\" x2=\"" << kW - kRight << "\" y1=\"" << Y(0.0) << "\" y2=\"" << Y(0.0)
         << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    }
    os << "<text x=\"" << kW / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << kH / 2 << ")\">"
       << ylabel << "</text>\n";
    os << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
  }

  static constexpr double kW = 720, kH = 480, kLeft = 64, kRight = 16, kTop = 28, kBottom = 44;
  double x0_, x1_, y0_, y1_;
  std::ostringstream body_;
};

const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
  return palette[i % 10];
}

std::string sweep_svg(const Result& r) {
  const bool t_axis = r.axis == "t";
  auto xof = [&](const BranchPoint& p) { return t_axis ? 2.0 * std::atan(p.axis_value) : p.axis_value; };
  double xa = INFINITY, xb = -INFINITY, ya = INFINITY, yb = -INFINITY;
  for (const auto& b : r.branches) {
    for (const auto& p : b.points) {
      xa = std::min(xa, xof(p)); xb = std::max(xb, xof(p));
      ya = std::min(ya, scaled(p.state.energy)); yb = std::max(yb, scaled(p.state.energy));
    }
  }
  if (!std::isfinite(xa)) xa = xb = ya = yb = 0.0;
  Svg svg(xa, xb, ya, yb);
  for (std::size_t i = 0; i < r.branches.size(); ++i) {
    std::vector<std::pair<double, double>> run;
    double prev = NAN;
    for (const auto& p : r.branches[i].points) {
      const double x = xof(p);
      // Passing t = +-inf wraps the chart; break the line there.
      if (!run.empty() && std::abs(x - prev) > 3.0) {
        svg.polyline(run, color(i));
        run.clear();
      }
      run.emplace_back(x, scaled(p.state.energy));
      prev = x;
    }
    svg.polyline(run, color(i));
  }
  const std::string xlabel = t_axis ? "2 atan t" : r.axis;
  return svg.str(r.command, xlabel, "sgn(E) sqrt|E|");
}

std::string berry_svg(const Result& r) {
  const auto& h = *r.holonomy;
  double xa = INFINITY, xb = -INFINITY, ya = INFINITY, yb = -INFINITY;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : h.path) {
    pts.emplace_back(2.0 * std::atan(t), v);
    xa = std::min(xa, pts.back().first); xb = std::max(xb, pts.back().first);
    ya = std::min(ya, v); yb = std::max(yb, v);
  }
  if (pts.empty()) xa = xb = ya = yb = 0.0;
  Svg svg(xa, xb, ya, yb);
  svg.polyline(pts, color(0));
  if (!pts.empty()) svg.dot(pts.front().first, pts.front().second, color(1));
  return svg.str("berry loop, sign factor " + std::to_string(h.sign_factor), "2 atan t", "v");
}

std::string holonomy_svg(const Result& r) {
  const auto& h = *r.holonomy;
  double ya = INFINITY, yb = -INFINITY;
  for (double e : h.energies) { ya = std::min(ya, scaled(e)); yb = std::max(yb, scaled(e)); }
  for (double e : h.final_energies) { ya = std::min(ya, scaled(e)); yb = std::max(yb, scaled(e)); }
  if (!std::isfinite(ya)) ya = yb = 0.0;
  Svg svg(0.0, 1.0, ya, yb);
  for (std::size_t i = 0; i < h.energies.size() && i < h.final_energies.size(); ++i) {
    svg.line(0.0, scaled(h.energies[i]), 1.0, scaled(h.final_energies[i]), color(i));
    svg.dot(0.0, scaled(h.energies[i]), color(i));
    svg.dot(1.0, scaled(h.final_energies[i]), color(i));
  }
  return svg.str("v cycle: levels at -V (left) and after the cycle (right)", "cycle", "sgn(E) sqrt|E|");
}

void emit(const Result& r, const Options& o, std::ostream& out) {
  std::ostringstream os;
  if (o.format == "csv") write_csv(r, os);
  else if (o.format == "json") os << result_json(r).dump(2) << "\n";
  else if (r.command == "berry") os << berry_svg(r);
  else if (r.command == "holonomy") os << holonomy_svg(r);
  else os << sweep_svg(r);
  if (o.output == "-") {
    out << os.str();
    return;
  }
  std::ofstream file(o.output, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + o.output + " for writing");
  file << os.str();
  if (!file) throw std::runtime_error("write to " + o.output + " failed");
}

// --- commands ----------------------------------------------------------

SweepSpec base_spec(const Options& o, SweepAxis axis) {
  SweepSpec spec;
  spec.axis = axis;
  spec.g = o.g;
  spec.t = o.t;
  spec.v = o.v;
  spec.length = o.length;
  spec.initial_step = o.step;
  spec.threads = thread_budget(o.threads);
  return spec;
}

void append(std::vector<Branch>& to, std::vector<Branch> from) {
  for (auto& b : from) to.push_back(std::move(b));
}

void spectrum_vs_g(const Options& o, Result& r) {
  r.axis = "g";
  r.parameters = {{"t", o.t}, {"v", o.v}, {"g_min", o.g_min}, {"g_max", o.g_max}, {"levels", o.levels}};
  if (!(o.g_max > o.g_min)) throw DomainError("need g-max > g-min");
  const DefectParams d(o.t, o.v, o.length);
  // Sweeps start at g = 0, where the linear levels seed them, unless the
  // range excludes it.
  const double anchor = std::clamp(0.0, o.g_min, o.g_max);
  const auto seeds = levels_at(d, anchor, o.levels);
  for (double end : {o.g_min, o.g_max}) {
    if (end == anchor) continue;
    SweepSpec spec = base_spec(o, SweepAxis::g);
    spec.start = anchor;
    spec.end = end;
    spec.seeds = seeds;
    spec.allow_turning = false;
    append(r.branches, sweep(spec));
  }
}

void spectrum_vs_t(const Options& o, Result& r) {
  r.axis = "t";
  r.parameters = {{"g", o.g}, {"v", o.v}, {"t_start", o.t_start}, {"t_end", o.t_end},
                  {"through_infinity", o.through_infinity}, {"levels", o.levels}};
  SweepSpec spec = base_spec(o, SweepAxis::t);
  spec.start = o.t_start;
  spec.end = o.t_end;
  spec.through_infinity = o.through_infinity;
  spec.seeds = levels_at(DefectParams(o.t_start, o.v, o.length), o.g, o.levels);
  r.branches = sweep(spec);
}

void spectrum_vs_v(const Options& o, Result& r) {
  r.axis = "v";
  r.parameters = {{"g", o.g}, {"t", o.t}, {"v_start", o.v_start}, {"v_end", o.v_end}, {"levels", o.levels}};
  SweepSpec spec = base_spec(o, SweepAxis::v);
  spec.start = o.v_start;
  spec.end = o.v_end;
  spec.seeds = levels_at(DefectParams(o.t, o.v_start, o.length), o.g, o.levels);
  r.branches = sweep(spec);
}

void berry(const Options& o, Result& r) {
  if (o.center.size() != 2) throw DomainError("--center takes t and v");
  r.parameters = {{"center_t", o.center[0]}, {"center_v", o.center[1]}, {"g", o.g}, {"radius", o.radius},
                  {"level", o.level}, {"points", o.points}};
  const double s0 = 2.0 * std::atan(o.center[0]) + o.radius;
  const auto lv = levels_at(DefectParams(std::tan(0.5 * s0), o.center[1], o.length), o.g, o.level + 1);
  if (static_cast<int>(lv.size()) <= o.level) throw NumericalError("level " + std::to_string(o.level) + " not found on the loop");
  r.holonomy = berry_loop({o.center[0], o.center[1]}, o.radius, o.g, lv[o.level], o.points);
  r.table = json::array();
  for (std::size_t i = 0; i < r.holonomy->path.size(); ++i) {
    r.table.push_back({{"index", i}, {"t", r.holonomy->path[i].first}, {"v", r.holonomy->path[i].second},
                       {"E", r.holonomy->energies.at(i)}, {"sign_factor", r.holonomy->sign_factor}});
  }
}

void holonomy(const Options& o, Result& r) {
  r.parameters = {{"t", o.t}, {"g", o.g}, {"v_max", o.v_max}, {"levels", o.levels}, {"round_trip", o.round_trip}};
  ExoticOptions ex;
  ex.bound_state_start = o.bound_start;
  ex.round_trip = o.round_trip;
  r.holonomy = exotic_cycle(o.t, o.v_max, o.g, o.levels, ex);
  const auto& h = *r.holonomy;
  r.table = json::array();
  for (const auto& [from, to] : h.permutation) {
    const bool shifted = std::find(h.shifted_levels.begin(), h.shifted_levels.end(), from) != h.shifted_levels.end();
    r.table.push_back({{"level", from}, {"maps_to", to}, {"E_start", h.energies.at(from)},
                       {"E_end", h.final_energies.at(from)}, {"shifted", shifted}});
  }
}

void linear(const Options& o, Result& r) {
  r.parameters = {{"t", o.t}, {"v", o.v}, {"levels", o.levels}};
  const DefectParams d(o.t, o.v, o.length);
  r.table = json::array();
  int i = 0;
  for (const auto& level : linear_spectrum(d, o.levels)) {
    r.table.push_back({{"level", i++}, {"E", level.energy}, {"k", level.k}, {"x0", level.x0},
                       {"branch", level.branch_sign == BranchSign::plus ? "plus" : "minus"}});
  }
}

// Elliptic solution against RK4 shooting for each level at (g, t, v).
void verify_levels(const Options& o, Result& r) {
  r.parameters = {{"g", o.g}, {"t", o.t}, {"v", o.v}, {"levels", o.levels}};
  const DefectParams d(o.t, o.v, o.length);
  const SolveConfig config;
  r.table = json::array();
  double worst_e = 0.0;
  double worst_psi = 0.0;
  int i = 0;
  for (const auto& s : levels_at(d, o.g, o.levels)) {
    const double psi0 = eval_psi(s, 0.0);
    const double dpsi0 = eval_dpsi(s, 0.0);
    // Started off the elliptic energy so that agreement is not by construction.
    const double e_start = s.energy + 1e-7 * (1.0 + std::abs(s.energy));
    const auto shot = shooting_solve(d, o.g, e_start, psi0, dpsi0, config);
    double de = NAN;
    double dpsi = NAN;
    if (shot.status == SolveStatus::converged) {
      de = std::abs(shot.energy - s.energy);
      dpsi = 0.0;
      for (int k = 1; k <= 64; ++k) {
        const double x = d.ring_length() * k / 64.0;
        const Shot at = shoot(o.g, shot.energy, shot.psi0, shot.dpsi0, x, config.shooting_steps * k / 64);
        dpsi = std::max(dpsi, std::abs(at.psi - eval_psi(s, x)));
      }
      worst_e = std::max(worst_e, de);
      worst_psi = std::max(worst_psi, dpsi);
    }
    r.table.push_back({{"level", i++}, {"family", std::string(to_string(s.family))}, {"E_elliptic", s.energy},
                       {"E_shooting", shot.energy}, {"abs_dE", de}, {"max_abs_dpsi", dpsi},
                       {"shooting", to_string(shot.status)}, {"residual_norm", residual_of(s)}});
    if (shot.status != SolveStatus::converged) r.error = "shooting did not converge for some level";
  }
  r.text = "max |dE| = " + num(worst_e) + ", max |dpsi| = " + num(worst_psi);
}

// Re-evaluates residual_norm for every point of a JSON result.
void verify_file(const Options& o, Result& r) {
  std::ifstream in(o.input);
  if (!in) throw std::runtime_error("cannot read " + o.input);
  const json doc = json::parse(in);
  r.parameters = {{"input", o.input}};
  r.table = json::array();
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& b : doc.at("branches")) {
    for (const auto& p : b.at("points")) {
      StationaryState s;
      const auto fam = family_from_string(p.at("family").get<std::string>());
      if (!fam) throw DomainError("unknown family " + p.at("family").get<std::string>());
      s.family = *fam;
      s.g = p.at("g");
      s.energy = p.at("E");
      s.c = p.at("c");
      s.x0 = p.at("x0");
      s.eta0 = p.value("eta0", 0.0);
      s.defect = DefectParams(p.at("t"), p.at("v"), p.value("L", kTwoPi));
      const double stored = p.at("residual_norm");
      const double now = residual_of(s);
      const double diff = std::isinf(stored) && std::isinf(now) ? 0.0 : std::abs(now - stored);
      worst = std::max(worst, diff);
      ++n;
    }
  }
  r.table.push_back({{"points", n}, {"max_abs_residual_difference", worst}, {"ok", worst <= 1e-12}});
  r.text = "re-evaluated " + std::to_string(n) + " points, max residual difference " + num(worst);
  if (worst > 1e-12) r.error = "stored residuals not reproduced";
}

}  // namespace

int thread_budget(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("RING_NLS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<long>(n, cap);
  }
  return n;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Stationary states of the cubic NLS on a ring with a point defect"};
  app.set_config("--config", "", "Read options from a file of key = value lines; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.add_option("--format", o.format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
  app.add_option("-o,--output", o.output, "Output file, - for stdout");
  app.add_option("--threads", o.threads, "Worker threads (0: all cores; capped by RING_NLS_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_option("--g", o.g, "Nonlinear coupling");
  app.add_option("--t", o.t, "Scale parameter of the defect");
  app.add_option("--v", o.v, "Delta strength of the defect");
  app.add_option("--length", o.length, "Ring length")->check(CLI::PositiveNumber);
  app.add_option("--levels", o.levels, "Number of levels")->check(CLI::PositiveNumber);
  app.add_option("--step", o.step, "Initial continuation step in the chart")->check(CLI::PositiveNumber);
  app.add_option("--g-min", o.g_min, "spectrum-vs-g: lower end");
  app.add_option("--g-max", o.g_max, "spectrum-vs-g: upper end");
  app.add_option("--t-start", o.t_start, "spectrum-vs-t: first t");
  app.add_option("--t-end", o.t_end, "spectrum-vs-t: last t");
  app.add_flag("--through-infinity", o.through_infinity, "spectrum-vs-t: go through t = +-inf instead of t = 0");
  app.add_option("--v-start", o.v_start, "spectrum-vs-v: first v");
  app.add_option("--v-end", o.v_end, "spectrum-vs-v: last v");
  app.add_option("--center", o.center, "berry: loop centre t v")->expected(2);
  app.add_option("--radius", o.radius, "berry: loop radius in the (2 atan t, v) chart")->check(CLI::PositiveNumber);
  app.add_option("--level", o.level, "berry: level index on the loop")->check(CLI::NonNegativeNumber);
  app.add_option("--points", o.points, "berry: points around the loop")->check(CLI::Range(8, 100000));
  app.add_option("--v-max", o.v_max, "holonomy: |v| at the ends of the cycle")->check(CLI::PositiveNumber);
  app.add_option("--bound-start", o.bound_start, "holonomy: v where the bound state is picked up");
  app.add_flag("--round-trip", o.round_trip, "holonomy: go -V -> +V -> -V");
  app.add_option("--input", o.input, "verify: JSON result whose residuals are re-evaluated");

  const char* names[][2] = {{"spectrum-vs-g", "Levels continued in g"},
                            {"spectrum-vs-t", "Levels continued in t"},
                            {"spectrum-vs-v", "Levels continued in v"},
                            {"berry", "Sign acquired around a circle in (2 atan t, v)"},
                            {"holonomy", "Level permutation of the v cycle through v = +-inf"},
                            {"verify", "Elliptic against shooting solutions, or re-check a JSON result"},
                            {"linear", "Linear (g = 0) spectrum"}};
  for (const auto& [name, help] : names) app.add_subcommand(name, help)->fallthrough();

  std::vector<const char*> argv{"ring_nls"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Result r;
  r.command = app.get_subcommands().front()->get_name();
  const bool plot_allowed = r.command.rfind("spectrum", 0) == 0 || r.command == "berry" || r.command == "holonomy";
  if (o.format == "svg" && !plot_allowed) {
    err << "error: svg output is only for sweeps and loops\n";
    return 2;
  }

  int status = 0;
  try {
    if (r.command == "spectrum-vs-g") spectrum_vs_g(o, r);
    else if (r.command == "spectrum-vs-t") spectrum_vs_t(o, r);
    else if (r.command == "spectrum-vs-v") spectrum_vs_v(o, r);
    else if (r.command == "berry") berry(o, r);
    else if (r.command == "holonomy") holonomy(o, r);
    else if (r.command == "linear") linear(o, r);
    else if (o.input.empty()) verify_levels(o, r);
    else verify_file(o, r);
  } catch (const DomainError& e) {
    r.error = e.what();
    status = 2;
  } catch (const std::exception& e) {
    r.error = e.what();
    status = 1;
  }
  if (!r.error.empty() && status == 0) status = 1;

  // Whatever was computed is written, failure or not; svg needs a result.
  const bool have_plot = r.command == "berry" || r.command == "holonomy" ? r.holonomy.has_value() : true;
  if (o.format != "svg" || have_plot) {
    try {
      emit(r, o, out);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (!r.text.empty()) (o.output == "-" ? err : out) << r.text << "\n";
  if (!r.error.empty()) err << "error: " << r.error << "\n";
  return status;
}

}  // namespace ringnls::cli

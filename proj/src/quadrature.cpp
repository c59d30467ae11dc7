#include "ringnls/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "ringnls/errors.hpp"

namespace ringnls::quadrature {

namespace {

NodesWeights build_rule(int n) {
  NodesWeights rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Breakpoints of [a, b] for `panels` base panels plus geometric refinement
// toward ends that face a nearby singularity.
std::vector<double> breakpoints(double a, double b, double left_gap, double right_gap, int panels) {
  const double width = (b - a) / panels;
  std::vector<double> pts;
  // Panel width never exceeds half the distance to the singularity.
  auto graded_side = [&](double gap, std::vector<double>& out) {
    double pos = 0.0;
    while (pos < 0.5 * (b - a)) {
      const double w = std::min(width, 0.5 * (gap + pos));
      pos += w;
      out.push_back(pos);
    }
  };
  if (!std::isfinite(left_gap) && !std::isfinite(right_gap)) {
    for (int i = 0; i <= panels; ++i) pts.push_back(a + i * width);
    pts.back() = b;
    return pts;
  }
  const double mid = 0.5 * (a + b);
  std::vector<double> left;
  std::vector<double> right;
  graded_side(std::isfinite(left_gap) ? left_gap : INFINITY, left);
  graded_side(std::isfinite(right_gap) ? right_gap : INFINITY, right);
  pts.push_back(a);
  for (double d : left) {
    if (a + d < mid) pts.push_back(a + d);
  }
  pts.push_back(mid);
  for (auto it = right.rbegin(); it != right.rend(); ++it) {
    if (b - *it > mid) pts.push_back(b - *it);
  }
  pts.push_back(b);
  return pts;
}

double apply(const std::function<double(double)>& f, const std::vector<double>& pts, const NodesWeights& rule) {
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    const double half = 0.5 * (pts[p + 1] - pts[p]);
    const double centre = 0.5 * (pts[p + 1] + pts[p]);
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) panel += rule.weights[i] * f(centre + half * rule.nodes[i]);
    sum += half * panel;
  }
  return sum;
}

}  // namespace

const NodesWeights& gauss_legendre(int n) {
  static std::mutex lock;
  static std::map<int, NodesWeights> cache;
  std::lock_guard<std::mutex> guard(lock);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double composite_gauss_legendre(const std::function<double(double)>& f, double a, double b, int order, int panels) {
  return apply(f, breakpoints(a, b, INFINITY, INFINITY, panels), gauss_legendre(order));
}

double graded_gauss_legendre(const std::function<double(double)>& f, double a, double b, double left_gap,
                             double right_gap, int order, int panels, double rel_tol, int max_doublings) {
  const NodesWeights& rule = gauss_legendre(order);
  double previous = apply(f, breakpoints(a, b, left_gap, right_gap, panels), rule);
  for (int d = 0; d < max_doublings; ++d) {
    panels *= 2;
    const double current = apply(f, breakpoints(a, b, 0.5 * left_gap, 0.5 * right_gap, panels), rule);
    if (!std::isfinite(current)) break;
    if (std::abs(current - previous) <= rel_tol * std::abs(current)) return current;
    previous = current;
  }
  std::ostringstream msg;
  msg << "quadrature did not reach relative tolerance " << rel_tol << " (last estimate " << previous << ")";
  throw NumericalError(msg.str());
}

}  // namespace ringnls::quadrature

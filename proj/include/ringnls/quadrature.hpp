#pragma once

// Composite Gauss-Legendre rules on [a, b].

#include <functional>
#include <vector>

namespace ringnls::quadrature {

struct NodesWeights {
  std::vector<double> nodes;  // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton on P_n, cached per n).
const NodesWeights& gauss_legendre(int n);

/// Fixed rule: `panels` equal panels of `order` points each.
double composite_gauss_legendre(const std::function<double(double)>& f, double a, double b, int order, int panels);

/// Composite rule with panels shrinking geometrically toward an end that
/// sits `left_gap` (resp. `right_gap`) away from a singularity; an infinite
/// gap means uniform panels on that side. The panel count doubles until two
/// successive results agree to rel_tol; throws NumericalError otherwise.
double graded_gauss_legendre(const std::function<double(double)>& f, double a, double b, double left_gap,
                             double right_gap, int order, int panels, double rel_tol, int max_doublings);

}  // namespace ringnls::quadrature

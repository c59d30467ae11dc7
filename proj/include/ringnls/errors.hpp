#pragma once

#include <stdexcept>
#include <string>

namespace ringnls {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical procedure failed to produce a trustworthy result
/// (quadrature non-convergence, ODE blow-up, bracketing failure, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ringnls

#pragma once

#include <stdexcept>
#include <string>

namespace degenctrl {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity that must be finite was not (weights, quadrature, reconstruction).
class NumericalDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A linear or fixed-point solver could not produce a usable answer.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace degenctrl

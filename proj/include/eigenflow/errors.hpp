#pragma once

#include <stdexcept>
#include <string>

namespace eigenflow {

/// Mesh failed a structural invariant (open edge, bad orientation, degenerate face, ...).
class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or unreadable input files.
class InvalidInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A solver or integrator failed to produce a finite, converged answer.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, double best_residual = 0.0)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

private:
  double best_residual_;
};

/// Mean curvature is not strictly positive where strict convexity is required.
class ConvexityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside the interval where a closed-form solution exists.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace eigenflow

#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Thrown when a request would enumerate a state space too large to hold in memory.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver gave up; carries the best residual reached.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

private:
  double best_residual_;
};

} // namespace qwalk

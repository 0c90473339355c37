#pragma once

#include <stdexcept>
#include <string>

namespace bellineq {

/// Malformed or out-of-contract input (bad shapes, non-unit vectors, bad JSON).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed the desk-scale caps (vertex counts, N limits).
class ResourceLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Raised when a local hidden-variable model is requested for data that
/// violates the complete two-setting inequality.
class InequalityViolated : public std::runtime_error {
 public:
  InequalityViolated(double lhs, double bound)
      : std::runtime_error("Bell inequality violated: " + std::to_string(lhs) +
                           " > " + std::to_string(bound)),
        lhs_(lhs),
        bound_(bound) {}

  double lhs() const noexcept { return lhs_; }
  double bound() const noexcept { return bound_; }

 private:
  double lhs_;
  double bound_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

}  // namespace bellineq

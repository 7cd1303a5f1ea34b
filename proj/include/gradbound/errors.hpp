#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradbound {

/// Input lies outside the admissibility box of a model, or a formula is
/// evaluated outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The explicit integrator produced a non-finite value.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// The evolving field left the admissibility box of its model.
class BoxExitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gradbound

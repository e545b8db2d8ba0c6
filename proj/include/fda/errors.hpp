#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fda {

/// A configuration or argument violates a documented bound.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Two agents (or an agent and a perceived neighbor) came closer than the
/// distance floor, so the interaction weight is undefined.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(std::int64_t step, int agent, int neighbor, double distance)
      : std::runtime_error(format(step, agent, neighbor, distance)),
        step_(step), agent_(agent), neighbor_(neighbor), distance_(distance) {}

  std::int64_t step() const noexcept { return step_; }
  int agent() const noexcept { return agent_; }
  int neighbor() const noexcept { return neighbor_; }
  double distance() const noexcept { return distance_; }

  /// Same error with the step index filled in by the caller.
  DegeneracyError at_step(std::int64_t step) const {
    return DegeneracyError(step, agent_, neighbor_, distance_);
  }

 private:
  static std::string format(std::int64_t step, int i, int j, double d) {
    std::ostringstream os;
    os << "distance below floor between agent " << i << " and neighbor " << j
       << " (d=" << d << ")";
    if (step >= 0) os << " at step " << step;
    return os.str();
  }

  std::int64_t step_;
  int agent_;
  int neighbor_;
  double distance_;
};

/// The preconditioner (I + c A) of the linearized consensus operator is
/// numerically singular.
class SingularPreconditionerError : public std::runtime_error {
 public:
  explicit SingularPreconditionerError(double condition)
      : std::runtime_error("singular preconditioner (condition estimate " +
                           std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace fda

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curveflow {

/// Schema or value error in an experiment configuration; `field` is a JSON
/// pointer such as /noise/beta.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A time step could not be completed (implicit solve diverged or the state
/// left the finite range).
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& message, double time, std::size_t iterations, double residual)
      : std::runtime_error(message), time_(time), iterations_(iterations), residual_(residual) {}
  double time() const { return time_; }
  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  double time_;
  std::size_t iterations_;
  double residual_;
};

}  // namespace curveflow

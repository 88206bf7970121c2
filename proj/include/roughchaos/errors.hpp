#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace roughchaos {

/// Invalid argument: dimension mismatch, index out of range, bad shapes.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured budget (atom counts, tuple counts).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state during time stepping.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Fixed-point iteration did not meet its tolerance; carries the distance trace.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Estimator cannot produce a value from the samples it has (e.g. zero hits).
class StatisticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace roughchaos

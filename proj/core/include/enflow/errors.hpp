#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace enflow {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition", message) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error("model", message) {}
};

/// p_i > 0 where q_i = 0: the divergence is +infinity.
class SupportError : public Error {
 public:
  SupportError(std::size_t index, const std::string& message)
      : Error("support_violation", message), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& message)
      : Error("infeasible", message) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(double residual, long iterations, const std::string& message,
                   std::vector<double> trace = {})
      : Error("non_convergence", message),
        residual_(residual),
        iterations_(iterations),
        trace_(std::move(trace)) {}
  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }
  /// Objective trace up to the point of failure, when the solver keeps one.
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  double residual_;
  long iterations_;
  std::vector<double> trace_;
};

/// A division x ./ y of the estimator hit y_i = 0 at time `time_index`.
class DegenerateSupportError : public Error {
 public:
  DegenerateSupportError(std::size_t time_index, std::size_t state_index,
                         const std::string& message)
      : Error("degenerate_support", message),
        time_index_(time_index),
        state_index_(state_index) {}
  std::size_t time_index() const noexcept { return time_index_; }
  std::size_t state_index() const noexcept { return state_index_; }

 private:
  std::size_t time_index_;
  std::size_t state_index_;
};

class FactorizationError : public Error {
 public:
  explicit FactorizationError(const std::string& message)
      : Error("factorization", message) {}
};

class EnumerationLimitError : public Error {
 public:
  explicit EnumerationLimitError(const std::string& message)
      : Error("enumeration_limit", message) {}
};

/// Malformed JSON input. `path()` is a JSON pointer to the offending node.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error("schema", message + " at " + (path.empty() ? "/" : path)),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace enflow

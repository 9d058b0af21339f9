#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace enflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Row sums of a stochastic kernel must be within this of 1.
inline constexpr double kStochasticTolerance = 1e-12;

/// Relative tolerance for mass-conservation checks between observation
/// vectors and the prior.
inline constexpr double kMassTolerance = 1e-9;

enum class Normalization { none, renormalize_rows };

/// One broken invariant found by validation.
struct Violation {
  std::string field;
  std::optional<std::size_t> index;
  std::string invariant;
  std::string message;
};

/// Nonnegative mass per hidden state. Integer counts are stored as reals.
class Marginal {
 public:
  Marginal() = default;
  explicit Marginal(Vector mass);

  /// Skips validation; used by deserialization so that `validate_instance`
  /// can report problems instead of throwing on the first one.
  static Marginal unchecked(Vector mass);

  const Vector& mass() const noexcept { return mass_; }
  Eigen::Index size() const noexcept { return mass_.size(); }
  double total() const { return mass_.sum(); }
  double operator[](Eigen::Index i) const { return mass_[i]; }
  bool is_integral() const;
  std::vector<Violation> check(const std::string& field) const;

 private:
  Vector mass_;
};

/// Row-stochastic n x n matrix A; a_ij is the probability of moving from
/// state i to state j in one step. All-zero rows are accepted for states
/// that never carry mass.
class TransitionModel {
 public:
  TransitionModel() = default;
  explicit TransitionModel(Matrix kernel,
                           Normalization normalization = Normalization::none);
  static TransitionModel unchecked(Matrix kernel);

  const Matrix& kernel() const noexcept { return kernel_; }
  Eigen::Index states() const noexcept { return kernel_.rows(); }
  bool row_is_zero(Eigen::Index i) const;
  std::vector<Violation> check(const std::string& field) const;

 private:
  Matrix kernel_;
};

/// Row-stochastic n x m matrix B; b_ik is the probability that an agent in
/// hidden state i emits observation symbol k.
class ObservationModel {
 public:
  ObservationModel() = default;
  explicit ObservationModel(Matrix kernel,
                            Normalization normalization = Normalization::none);
  static ObservationModel unchecked(Matrix kernel);

  const Matrix& kernel() const noexcept { return kernel_; }
  Eigen::Index states() const noexcept { return kernel_.rows(); }
  Eigen::Index symbols() const noexcept { return kernel_.cols(); }
  std::vector<Violation> check(const std::string& field) const;

 private:
  Matrix kernel_;
};

/// M_t: flow(i, j) is the mass moving from state i at t-1 to j at t.
struct TransferPlan {
  Matrix flow;
  int time_index = 1;
};

/// D_t (or D_st): assignment(i, k) is the mass in state i observed as k.
struct ObservationPlan {
  Matrix assignment;
  int time_index = 1;
  int sensor_index = 0;
};

/// Phi_t (or Phi_st): aggregate count per observation symbol.
struct AggregateObservation {
  Vector counts;
  int time_index = 1;
  int sensor_index = 0;
};

struct ProblemInstance {
  Marginal prior;
  TransitionModel transition;
  std::vector<ObservationModel> sensors;
  /// observations[t - 1][s] holds Phi_st for t = 1..T.
  std::vector<std::vector<AggregateObservation>> observations;

  int horizon() const noexcept { return static_cast<int>(observations.size()); }
  std::size_t sensor_count() const noexcept { return sensors.size(); }
};

/// Empty iff every model invariant holds. Never throws.
std::vector<Violation> validate_instance(const ProblemInstance& instance);

/// Throws PreconditionError listing the violations when the instance is
/// not well formed.
void require_valid(const ProblemInstance& instance);

/// result[t] = (A^T)^t mu_0 for t = 0..steps.
std::vector<Marginal> forward_propagate(const Marginal& prior,
                                        const TransitionModel& transition,
                                        int steps);

std::string describe(const Violation& violation);

}  // namespace enflow

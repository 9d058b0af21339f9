#pragma once

#include "enflow/model.hpp"

#include <string>
#include <vector>

namespace enflow {

/// Output of a reference solver. Continuous solvers fill marginals and
/// plans; the enumeration fills `integer_plan` and `log_likelihood`.
struct OracleResult {
  std::string method;
  double objective = 0.0;
  std::vector<Marginal> marginals;
  std::vector<Matrix> transfer_plans;
  /// observation_plans[t - 1][s]
  std::vector<std::vector<Matrix>> observation_plans;
  Matrix integer_plan;
  double log_likelihood = 0.0;
  /// Number of feasible integer plans visited by the enumeration.
  long candidates = 0;
  /// Largest equality-constraint violation relative to total mass.
  double constraint_violation = 0.0;
  /// Infinity norm of the gradient projected on the constraint nullspace.
  double stationarity = 0.0;
  long iterations = 0;
};

struct OracleOptions {
  double tol = 1e-8;
  long max_iters = 500;
};

inline constexpr int kEnumerationMaxStates = 4;
inline constexpr double kEnumerationMaxMass = 12.0;

/// Exact maximum of the multinomial transfer likelihood over integer plans
/// with row sums `prior` and column sums `target`, by lexicographic
/// enumeration. Ties keep the first plan in that order.
OracleResult brute_force_ml_plan(const Marginal& prior, const TransitionModel& transition,
                                 const Marginal& target);

/// Chain bridge (T = 1 is the single-step problem) solved as a dense convex
/// program by damped Newton steps restricted to the constraint nullspace.
/// Requires a strictly positive transition kernel.
OracleResult generic_kl_solver(const Marginal& mu0, const Marginal& muT,
                               const TransitionModel& transition, int horizon,
                               const OracleOptions& options = {});

/// Estimation problem with any number of sensors, same method. Requires
/// strictly positive transition and observation kernels.
OracleResult generic_kl_solver(const ProblemInstance& instance,
                               const OracleOptions& options = {});

}  // namespace enflow

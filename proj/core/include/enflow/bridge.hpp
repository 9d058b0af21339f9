#pragma once

#include "enflow/model.hpp"

#include <optional>
#include <vector>

namespace enflow {

struct BridgeOptions {
  /// Stop once the largest marginal violation is <= tol * total mass.
  double tol = 1e-9;
  long max_iters = 100000;
  /// Starting column scaling; all-ones when absent.
  std::optional<Vector> initial_column_scaling;
};

/// Result of alternating diagonal scaling of a nonnegative kernel K:
/// plan = diag(row_scaling) K diag(col_scaling).
struct SinkhornResult {
  Vector row_scaling;
  Vector col_scaling;
  Matrix plan;
  long iterations = 0;
  /// max(|plan 1 - row_target|, |plan^T 1 - col_target|) / total mass
  double residual = 0.0;
  /// L1 row-marginal violation / total mass after every column update.
  std::vector<double> l1_history;
};

/// Sinkhorn scaling of `kernel` onto the given marginals. Throws
/// InfeasibleError when the residual stagnates (no 0.1% improvement over
/// 100 iterations) and the support admits no feasible plan, or when a
/// scaling denominator vanishes on an infeasible support; throws
/// ConvergenceError after max_iters.
SinkhornResult sinkhorn_scaling(const Matrix& kernel, const Vector& row_target,
                                const Vector& col_target,
                                const BridgeOptions& options = {});

struct BridgeSolution {
  /// plans[t - 1] is M_t for t = 1..T.
  std::vector<TransferPlan> plans;
  /// marginals[0] = mu_0, marginals[T] = mu_T, interior ones estimated.
  std::vector<Marginal> marginals;
  /// sum_t H(M_t | diag(mu_{t-1}) A)
  double objective = 0.0;
  long iterations = 0;
  double residual = 0.0;
  std::vector<double> l1_history;
};

/// Most likely single-step transfer plan between two marginals:
///   min H(M | diag(mu0) A)  s.t.  M 1 = mu0, M^T 1 = mu1.
BridgeSolution solve_single_step(const Marginal& mu0, const Marginal& mu1,
                                 const TransitionModel& transition,
                                 const BridgeOptions& options = {});

/// Most likely T-step evolution between fixed endpoint marginals. The
/// endpoint coupling is found on the T-step kernel; the intermediate
/// marginals and plans follow from the forward/backward scaling vectors.
BridgeSolution solve_chain(const Marginal& mu0, const Marginal& muT,
                           const TransitionModel& transition, int horizon,
                           const BridgeOptions& options = {});

/// A^power by repeated multiplication.
Matrix matrix_power(const Matrix& a, int power);

/// min trace(C^T M) + epsilon H(M | 1)  s.t.  M 1 = mu0, M^T 1 = mu1.
struct EntropicOmtProblem {
  Matrix cost;
  double epsilon = 1.0;
  Marginal mu0;
  Marginal mu1;
};

/// KL form of an entropic transport problem. Solving the single-step bridge
/// on (mu0, mu1, prior_kernel) yields the transport minimizer, and
///   omt_objective = epsilon * (kl_objective + objective_offset).
struct OmtReduction {
  Marginal mu0;
  Marginal mu1;
  TransitionModel prior_kernel;
  double epsilon = 1.0;
  double objective_offset = 0.0;

  double omt_objective(double kl_objective) const {
    return epsilon * (kl_objective + objective_offset);
  }
};

OmtReduction omt_to_kl(const EntropicOmtProblem& problem);

/// trace(C^T M) + epsilon H(M | 1) evaluated directly.
double entropic_omt_objective(const EntropicOmtProblem& problem,
                              const Matrix& plan);

/// Row-stochastic factors Mbar_t = diag(mu_{t-1})^{-1} M_t.
std::vector<Matrix> factor_row_stochastic(const BridgeSolution& solution);

/// sum_t sum_i (mu_{t-1})_i H(Mbar_t[i, :] | A[i, :]), the objective written
/// in terms of row-stochastic factors.
double row_stochastic_objective(const std::vector<Matrix>& factors,
                                const std::vector<Marginal>& marginals,
                                const TransitionModel& transition);

}  // namespace enflow

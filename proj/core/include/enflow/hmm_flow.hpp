#pragma once

#include "enflow/model.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace enflow {

/// How the scaling recursions guard against over- and underflow.
enum class LogDomain {
  /// Linear products with per-vector rescaling; entries that would leave
  /// the representable range are recomputed by log-sum-exp.
  automatic,
  /// Log-sum-exp everywhere.
  on,
  /// Plain linear products, exactly as the fixed-point equations read.
  off,
};

/// Scaling vectors of the dual block-coordinate ascent, stored as natural
/// logarithms (-infinity encodes an exact zero). The forward (y) and
/// backward (w) caches are indexed t = 1..T at position t - 1.
struct DualState {
  Vector log_u1;
  /// log_v[t - 1][s]
  std::vector<std::vector<Vector>> log_v;
  std::vector<Vector> log_y;
  std::vector<Vector> log_w;

  Vector u1() const { return log_u1.array().exp().matrix(); }
  Vector v(int t, int s) const { return log_v.at(t - 1).at(s).array().exp().matrix(); }
};

struct EstimatorOptions {
  /// Converged when the relative constraint residual and the relative
  /// change of the dual objective over one sweep are both <= tol.
  double tol = 1e-9;
  long max_sweeps = 100000;
  LogDomain log_domain = LogDomain::automatic;
  /// Starting point for the v-blocks; all ones when absent.
  std::optional<DualState> initial;
  /// Also record the dual objective after every single block update.
  bool record_block_trace = false;
};

struct FlowEstimate {
  /// marginals[t] = mu_t for t = 0..T; marginals[0] is the prior.
  std::vector<Marginal> marginals;
  /// transfer_plans[t - 1] = M_t
  std::vector<TransferPlan> transfer_plans;
  /// observation_plans[t - 1][s] = D_st
  std::vector<std::vector<ObservationPlan>> observation_plans;
  DualState dual;
  /// Dual objective at the end of each sweep (non-decreasing).
  std::vector<double> dual_objective_trace;
  /// Dual objective after each block update; empty unless requested.
  std::vector<double> block_trace;
  long sweeps = 0;
  /// Largest violation of any plan/marginal constraint over the total mass.
  double residual = 0.0;
  /// Primal objective: sum of transfer and observation KL terms.
  double objective = 0.0;
  /// (t, i) pairs where the reconstructed marginal is exactly zero.
  std::vector<std::pair<int, int>> zero_mass_states;
};

/// Incremental solver state: one `sweep()` updates u_1 and then every v_ts
/// in ascending t (and sensor order) in closed form. Exposed so callers can
/// time or inspect individual sweeps.
class FlowSweeper {
 public:
  FlowSweeper(const ProblemInstance& instance, const EstimatorOptions& options);
  ~FlowSweeper();
  FlowSweeper(FlowSweeper&&) noexcept;
  FlowSweeper& operator=(FlowSweeper&&) noexcept;

  void sweep();
  /// Dual objective at the current iterate.
  double dual_objective() const;
  /// Largest |D_st^T 1 - Phi_st| / N under the marginals implied by the
  /// current iterate.
  double observation_residual() const;
  FlowEstimate reconstruct() const;
  const DualState& dual() const;
  const std::vector<double>& block_trace() const;
  /// Multiply-adds spent in kernel products so far.
  long work() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Single-sensor estimation of the most likely flow (S must be 1).
FlowEstimate estimate_flow(const ProblemInstance& instance,
                           const EstimatorOptions& options = {});

/// Estimation with S >= 1 sensors observing the same hidden ensemble.
FlowEstimate estimate_flow_multi(const ProblemInstance& instance,
                                 const EstimatorOptions& options = {});

/// sum_t H(M_t | diag(mu_{t-1}) A) + sum_t sum_s H(D_st | diag(mu_t) B_s).
/// Requires the estimate's residual to be <= 1e-6.
double evaluate_primal_objective(const FlowEstimate& estimate,
                                 const ProblemInstance& instance);

/// Same objective for arbitrary plans and marginals (no residual check).
double primal_objective(const std::vector<Marginal>& marginals,
                        const std::vector<Matrix>& transfer_plans,
                        const std::vector<std::vector<Matrix>>& observation_plans,
                        const ProblemInstance& instance);

/// Largest constraint violation of plans/marginals relative to total mass.
double constraint_residual(const std::vector<Marginal>& marginals,
                           const std::vector<Matrix>& transfer_plans,
                           const std::vector<std::vector<Matrix>>& observation_plans,
                           const ProblemInstance& instance);

}  // namespace enflow

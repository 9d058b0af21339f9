#pragma once

#include "enflow/model.hpp"

#include <cstdint>
#include <vector>

namespace enflow {

/// One sampled realization of the ensemble. Every quantity is integer
/// valued and satisfies the plan/marginal constraints exactly.
struct Trajectory {
  /// marginals[t] for t = 0..T
  std::vector<Marginal> marginals;
  /// transfer_plans[t - 1] = M_t
  std::vector<TransferPlan> transfer_plans;
  /// observation_plans[t - 1][s] = D_st
  std::vector<std::vector<ObservationPlan>> observation_plans;
  /// observations[t - 1][s] = Phi_st = D_st^T 1
  std::vector<std::vector<AggregateObservation>> observations;
  std::uint64_t seed = 0;

  int horizon() const noexcept { return static_cast<int>(transfer_plans.size()); }
};

/// Samples T steps: row i of M_t ~ Multinomial((mu_{t-1})_i, A[i, :]) and
/// row i of D_st ~ Multinomial((mu_t)_i, B_s[i, :]).
Trajectory simulate(const Marginal& prior, const TransitionModel& transition,
                    const std::vector<ObservationModel>& sensors, int horizon,
                    std::uint64_t seed);

/// Estimation problem for `trajectory`'s observations under a (possibly
/// mismatched) model.
ProblemInstance make_instance(const Marginal& prior, const TransitionModel& transition,
                              const std::vector<ObservationModel>& sensors,
                              const Trajectory& trajectory);

/// a_ij proportional to exp(-(j - i - drift)^2 / (2 sigma^2)), rows
/// normalized; the displacement j - i is centred on `drift`.
TransitionModel build_gaussian_chain(int states, double sigma, double drift);

/// b_ik proportional to exp(-(k - (i + 10) / 20)^2 / (2 sigma_b^2)) with
/// 1-based i and k, rows normalized.
ObservationModel build_binned_observation(int states, int symbols, double sigma_b);

/// Integer counts summing to `total` in proportion to `weights`, by largest
/// remainder (ties to the lower index).
Vector apportion(const Vector& weights, std::int64_t total);

}  // namespace enflow

#pragma once

#include "enflow/model.hpp"

#include <span>

namespace enflow {

/// H(p | q) = sum_i p_i log(p_i / q_i) with 0 log 0 = 0. Matrices are
/// flattened. Throws SupportError (carrying the flat index) when p_i > 0 and
/// q_i = 0, DimensionError on shape mismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Vector& p, const Vector& q);
double kl_divergence(const Matrix& p, const Matrix& q);

/// Exact log-probability that the multinomial transitions of an integer
/// ensemble `prior` under `transition` produce the integer plan M:
///   sum_i [ log multinomial(mu_i; m_i1..m_in) + sum_j m_ij log a_ij ].
/// Returns -infinity when support(M) is not contained in
/// support(diag(prior) A). Throws PreconditionError for non-integer input or
/// row sums that do not equal the prior.
double log_transfer_likelihood(const Marginal& prior,
                               const TransitionModel& transition,
                               const Matrix& plan);

struct LikelihoodReport {
  double exact_log_likelihood = 0.0;
  /// H(M | diag(mu_0) A)
  double kl_rate = 0.0;
  /// (-H + (n/2) log N) - L
  double upper_slack = 0.0;
  /// L - (-H - (1/2)(n^2 + n(n-1) log(2 pi) / log N) log N)
  double lower_slack = 0.0;
  double n_particles = 0.0;
};

/// Evaluates the two Stirling-based inequalities that sandwich the exact
/// multinomial log-likelihood around -H(M | diag(mu_0) A). Requires N >= 2.
LikelihoodReport likelihood_bounds(const Marginal& prior,
                                   const TransitionModel& transition,
                                   const Matrix& plan);

}  // namespace enflow

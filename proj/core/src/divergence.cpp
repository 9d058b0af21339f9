#include "enflow/divergence.hpp"

#include "enflow/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace enflow {

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DimensionError("kl_divergence: operands differ in size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw PreconditionError("kl_divergence: negative entry at index " +
                              std::to_string(i));
    }
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw SupportError(i, "kl_divergence: p > 0 where q = 0 at index " +
                                std::to_string(i));
    }
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

double kl_divergence(const Vector& p, const Vector& q) {
  return kl_divergence(std::span<const double>(p.data(), p.size()),
                       std::span<const double>(q.data(), q.size()));
}

double kl_divergence(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw DimensionError("kl_divergence: matrix shapes differ");
  }
  return kl_divergence(std::span<const double>(p.data(), p.size()),
                       std::span<const double>(q.data(), q.size()));
}

namespace {

void require_integral_plan(const Marginal& prior,
                           const TransitionModel& transition,
                           const Matrix& plan) {
  const auto n = prior.size();
  if (transition.states() != n || plan.rows() != n || plan.cols() != n) {
    throw DimensionError("likelihood: prior, transition and plan sizes differ");
  }
  if (!prior.is_integral()) {
    throw PreconditionError("likelihood: prior must hold integer counts");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double m = plan(i, j);
      if (m < 0.0 || m != std::floor(m)) {
        throw PreconditionError("likelihood: plan must hold nonnegative integers");
      }
    }
    if (plan.row(i).sum() != prior[i]) {
      throw PreconditionError("likelihood: plan row " + std::to_string(i) +
                              " does not sum to the prior count");
    }
  }
}

}  // namespace

double log_transfer_likelihood(const Marginal& prior,
                               const TransitionModel& transition,
                               const Matrix& plan) {
  require_integral_plan(prior, transition, plan);
  const auto& a = transition.kernel();
  double log_p = 0.0;
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    if (prior[i] == 0.0) continue;
    log_p += std::lgamma(prior[i] + 1.0);
    for (Eigen::Index j = 0; j < prior.size(); ++j) {
      const double m = plan(i, j);
      if (m == 0.0) continue;
      if (a(i, j) == 0.0) return -std::numeric_limits<double>::infinity();
      log_p += m * std::log(a(i, j)) - std::lgamma(m + 1.0);
    }
  }
  return log_p;
}

LikelihoodReport likelihood_bounds(const Marginal& prior,
                                   const TransitionModel& transition,
                                   const Matrix& plan) {
  require_integral_plan(prior, transition, plan);
  const double n_particles = prior.total();
  if (n_particles < 2.0) {
    throw PreconditionError("likelihood_bounds: requires N >= 2 so that log N > 0");
  }
  const double n = static_cast<double>(prior.size());
  const Matrix reference = prior.mass().asDiagonal() * transition.kernel();

  LikelihoodReport report;
  report.n_particles = n_particles;
  report.exact_log_likelihood = log_transfer_likelihood(prior, transition, plan);
  if (!std::isfinite(report.exact_log_likelihood)) {
    throw SupportError(0, "likelihood_bounds: plan leaves the support of diag(mu_0) A");
  }
  report.kl_rate = kl_divergence(plan, reference);

  const double log_n = std::log(n_particles);
  const double upper = -report.kl_rate + 0.5 * n * log_n;
  const double lower =
      -report.kl_rate -
      0.5 * (n * n + n * (n - 1.0) * std::log(2.0 * std::numbers::pi) / log_n) *
          log_n;
  report.upper_slack = upper - report.exact_log_likelihood;
  report.lower_slack = report.exact_log_likelihood - lower;
  return report;
}

}  // namespace enflow

#include "enflow/bridge.hpp"

#include "enflow/divergence.hpp"
#include "enflow/errors.hpp"
#include "enflow/transport_feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace enflow {
namespace {

constexpr long kStagnationWindow = 100;
constexpr double kStagnationFactor = 0.999;

void require_same_mass(const Vector& a, const Vector& b, const char* what) {
  const double ta = a.sum();
  const double tb = b.sum();
  if (std::abs(ta - tb) > kMassTolerance * std::max(1.0, std::abs(ta))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": marginal totals differ (" << ta << " vs " << tb << ")";
    throw PreconditionError(msg.str());
  }
}

[[noreturn]] void report_infeasible(const Matrix& kernel, const Vector& row_target,
                                    const Vector& col_target, const char* why) {
  const double routed = max_transportable_mass(kernel, row_target, col_target);
  std::ostringstream msg;
  msg.precision(10);
  msg << "infeasible marginals: " << why << "; at most " << routed << " of "
      << row_target.sum() << " units can be routed through the kernel support";
  throw InfeasibleError(msg.str());
}

// target ./ denominator with 0 / anything = 0. Returns the first index where
// a positive target meets a zero denominator, or -1.
Eigen::Index scale_into(const Vector& target, const Vector& denominator,
                        Vector& out) {
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    if (target[i] == 0.0) {
      out[i] = 0.0;
    } else if (denominator[i] > 0.0) {
      out[i] = target[i] / denominator[i];
    } else {
      return i;
    }
  }
  return -1;
}

double max_marginal_violation(const Matrix& plan, const Vector& rows,
                              const Vector& cols) {
  const double rv = (plan.rowwise().sum() - rows).cwiseAbs().maxCoeff();
  const double cv = (plan.colwise().sum().transpose() - cols).cwiseAbs().maxCoeff();
  return std::max(rv, cv);
}

BridgeSolution assemble_chain(const Marginal& mu0, const Marginal& muT,
                              const TransitionModel& transition, int horizon,
                              const SinkhornResult& scaled) {
  const Matrix& a = transition.kernel();

  // Forward potentials f_t = (A^T)^t (alpha .* mu0); backward h_t = A^{T-t} beta.
  std::vector<Vector> forward(static_cast<std::size_t>(horizon) + 1);
  std::vector<Vector> backward(static_cast<std::size_t>(horizon) + 1);
  forward[0] = scaled.row_scaling.cwiseProduct(mu0.mass());
  for (int t = 1; t <= horizon; ++t) {
    forward[t] = a.transpose() * forward[t - 1];
  }
  backward[horizon] = scaled.col_scaling;
  for (int t = horizon - 1; t >= 0; --t) {
    backward[t] = a * backward[t + 1];
  }

  BridgeSolution solution;
  solution.iterations = scaled.iterations;
  solution.l1_history = scaled.l1_history;
  solution.marginals.reserve(static_cast<std::size_t>(horizon) + 1);
  solution.marginals.push_back(mu0);
  for (int t = 1; t < horizon; ++t) {
    solution.marginals.push_back(
        Marginal::unchecked(forward[t].cwiseProduct(backward[t])));
  }
  solution.marginals.push_back(muT);

  double residual = 0.0;
  const double total = std::max(mu0.total(), 1e-300);
  for (int t = 1; t <= horizon; ++t) {
    Matrix flow = forward[t - 1].asDiagonal() * a * backward[t].asDiagonal();
    residual = std::max(
        residual, max_marginal_violation(flow, solution.marginals[t - 1].mass(),
                                         solution.marginals[t].mass()) /
                      total);
    solution.objective += kl_divergence(
        flow, Matrix(solution.marginals[t - 1].mass().asDiagonal() * a));
    solution.plans.push_back({std::move(flow), t});
  }
  solution.residual = residual;
  return solution;
}

}  // namespace

SinkhornResult sinkhorn_scaling(const Matrix& kernel, const Vector& row_target,
                                const Vector& col_target,
                                const BridgeOptions& options) {
  if (kernel.rows() != row_target.size() || kernel.cols() != col_target.size()) {
    throw DimensionError("sinkhorn_scaling: kernel and marginal sizes differ");
  }
  if ((kernel.array() < 0.0).any() || !kernel.allFinite()) {
    throw PreconditionError("sinkhorn_scaling: kernel must be finite and nonnegative");
  }
  require_same_mass(row_target, col_target, "sinkhorn_scaling");
  if (!(options.tol > 0.0) || options.max_iters < 1) {
    throw PreconditionError("sinkhorn_scaling: tol must be positive, max_iters >= 1");
  }
  const double total = row_target.sum();
  if (!(total > 0.0)) throw PreconditionError("sinkhorn_scaling: zero total mass");

  SinkhornResult result;
  result.col_scaling = Vector::Ones(kernel.cols());
  if (options.initial_column_scaling) {
    if (options.initial_column_scaling->size() != kernel.cols() ||
        (options.initial_column_scaling->array() <= 0.0).any()) {
      throw PreconditionError("sinkhorn_scaling: initial scaling must be positive");
    }
    result.col_scaling = *options.initial_column_scaling;
  }
  for (Eigen::Index j = 0; j < col_target.size(); ++j) {
    if (col_target[j] == 0.0) result.col_scaling[j] = 0.0;
  }
  result.row_scaling = Vector::Zero(kernel.rows());

  double window_start_residual = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= options.max_iters; ++it) {
    const Vector row_den = kernel * result.col_scaling;
    if (scale_into(row_target, row_den, result.row_scaling) >= 0) {
      report_infeasible(kernel, row_target, col_target,
                        "a state with mass has no admissible destination");
    }
    const Vector col_den = kernel.transpose() * result.row_scaling;
    if (scale_into(col_target, col_den, result.col_scaling) >= 0) {
      report_infeasible(kernel, row_target, col_target,
                        "a target state cannot be reached from any source with mass");
    }
    if (!result.row_scaling.allFinite() || !result.col_scaling.allFinite()) {
      throw ConvergenceError(std::numeric_limits<double>::infinity(), it,
                             "sinkhorn_scaling: scaling vectors overflowed");
    }

    // Columns are exact after the column update; only rows can be off.
    const Vector rows =
        result.row_scaling.cwiseProduct(kernel * result.col_scaling);
    const Vector gap = rows - row_target;
    const double inf_res = gap.cwiseAbs().maxCoeff() / total;
    result.l1_history.push_back(gap.cwiseAbs().sum() / total);
    result.iterations = it;
    result.residual = inf_res;
    if (inf_res <= options.tol) break;

    if (it % kStagnationWindow == 0) {
      if (inf_res > kStagnationFactor * window_start_residual &&
          !transport_feasible(kernel, row_target, col_target)) {
        report_infeasible(kernel, row_target, col_target,
                          "scaling residual stagnated");
      }
      window_start_residual = inf_res;
    }
    if (it == options.max_iters) {
      std::ostringstream msg;
      msg << "sinkhorn_scaling: no convergence after " << it
          << " iterations (residual " << inf_res << ")";
      throw ConvergenceError(inf_res, it, msg.str());
    }
  }

  result.plan = result.row_scaling.asDiagonal() * kernel *
                result.col_scaling.asDiagonal();
  result.residual =
      max_marginal_violation(result.plan, row_target, col_target) / total;
  return result;
}

BridgeSolution solve_single_step(const Marginal& mu0, const Marginal& mu1,
                                 const TransitionModel& transition,
                                 const BridgeOptions& options) {
  return solve_chain(mu0, mu1, transition, 1, options);
}

Matrix matrix_power(const Matrix& a, int power) {
  if (a.rows() != a.cols()) throw DimensionError("matrix_power: matrix not square");
  if (power < 0) throw PreconditionError("matrix_power: negative power");
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int k = 0; k < power; ++k) out = out * a;
  return out;
}

BridgeSolution solve_chain(const Marginal& mu0, const Marginal& muT,
                           const TransitionModel& transition, int horizon,
                           const BridgeOptions& options) {
  if (horizon < 1) throw PreconditionError("solve_chain: horizon must be >= 1");
  if (mu0.size() != muT.size() || transition.states() != mu0.size()) {
    throw DimensionError("solve_chain: marginal and kernel sizes differ");
  }
  require_same_mass(mu0.mass(), muT.mass(), "solve_chain");
  const Matrix kernel =
      mu0.mass().asDiagonal() * matrix_power(transition.kernel(), horizon);
  const SinkhornResult scaled =
      sinkhorn_scaling(kernel, mu0.mass(), muT.mass(), options);
  return assemble_chain(mu0, muT, transition, horizon, scaled);
}

OmtReduction omt_to_kl(const EntropicOmtProblem& problem) {
  const auto n = problem.mu0.size();
  if (problem.cost.rows() != n || problem.cost.cols() != problem.mu1.size()) {
    throw DimensionError("omt_to_kl: cost and marginal sizes differ");
  }
  if (problem.cost.rows() != problem.cost.cols()) {
    throw DimensionError("omt_to_kl: cost matrix must be square");
  }
  if (!(problem.epsilon > 0.0)) throw PreconditionError("omt_to_kl: epsilon must be positive");
  if (!problem.cost.allFinite()) throw PreconditionError("omt_to_kl: cost must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(problem.mu0[i] > 0.0)) {
      throw PreconditionError("omt_to_kl: mu0 must be strictly positive (index " +
                              std::to_string(i) + ")");
    }
  }

  // Gibbs kernel exp(-C / eps), row-normalized in log space.
  Matrix kernel(n, n);
  double offset = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector logk = -problem.cost.row(i).transpose() / problem.epsilon;
    const double peak = logk.maxCoeff();
    const double log_row_sum = peak + std::log((logk.array() - peak).exp().sum());
    kernel.row(i) = (logk.array() - log_row_sum).exp().transpose();
    offset += problem.mu0[i] * (std::log(problem.mu0[i]) - log_row_sum);
  }
  return OmtReduction{problem.mu0, problem.mu1,
                      TransitionModel(std::move(kernel), Normalization::renormalize_rows),
                      problem.epsilon, offset};
}

double entropic_omt_objective(const EntropicOmtProblem& problem,
                              const Matrix& plan) {
  if (plan.rows() != problem.cost.rows() || plan.cols() != problem.cost.cols()) {
    throw DimensionError("entropic_omt_objective: shape mismatch");
  }
  const Matrix ones = Matrix::Ones(plan.rows(), plan.cols());
  return (problem.cost.array() * plan.array()).sum() +
         problem.epsilon * kl_divergence(plan, ones);
}

std::vector<Matrix> factor_row_stochastic(const BridgeSolution& solution) {
  if (solution.marginals.size() != solution.plans.size() + 1) {
    throw DimensionError("factor_row_stochastic: need T plans and T+1 marginals");
  }
  std::vector<Matrix> factors;
  factors.reserve(solution.plans.size());
  for (std::size_t t = 0; t < solution.plans.size(); ++t) {
    const Vector& mass = solution.marginals[t].mass();
    const Matrix& flow = solution.plans[t].flow;
    Matrix factor(flow.rows(), flow.cols());
    for (Eigen::Index i = 0; i < flow.rows(); ++i) {
      if (mass[i] > 0.0) {
        factor.row(i) = flow.row(i) / mass[i];
        continue;
      }
      if ((flow.row(i).array() > 0.0).any()) {
        throw FactorizationError("factor_row_stochastic: state " + std::to_string(i) +
                                 " at time " + std::to_string(t) +
                                 " has zero mass but positive outgoing flow");
      }
      throw PreconditionError("factor_row_stochastic: marginal " + std::to_string(t) +
                              " is zero at state " + std::to_string(i));
    }
    factors.push_back(std::move(factor));
  }
  return factors;
}

double row_stochastic_objective(const std::vector<Matrix>& factors,
                                const std::vector<Marginal>& marginals,
                                const TransitionModel& transition) {
  if (marginals.size() != factors.size() + 1) {
    throw DimensionError("row_stochastic_objective: need T factors and T+1 marginals");
  }
  const Matrix& a = transition.kernel();
  double total = 0.0;
  for (std::size_t t = 0; t < factors.size(); ++t) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double weight = marginals[t][i];
      if (weight == 0.0) continue;
      total += weight * kl_divergence(Vector(factors[t].row(i).transpose()),
                                      Vector(a.row(i).transpose()));
    }
  }
  return total;
}

}  // namespace enflow

#include "enflow/simulator.hpp"

#include "enflow/errors.hpp"
#include "enflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace enflow {
namespace {

Matrix sample_rows(Rng& rng, const Vector& counts, const Matrix& kernel) {
  Matrix out = Matrix::Zero(kernel.rows(), kernel.cols());
  std::vector<double> row(static_cast<std::size_t>(kernel.cols()));
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    const auto count = static_cast<std::int64_t>(counts[i]);
    if (count == 0) continue;
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) row[j] = kernel(i, j);
    const auto drawn = rng.multinomial(count, row);
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      out(i, j) = static_cast<double>(drawn[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace

Trajectory simulate(const Marginal& prior, const TransitionModel& transition,
                    const std::vector<ObservationModel>& sensors, int horizon,
                    std::uint64_t seed) {
  if (horizon < 0) throw PreconditionError("simulate: horizon must be nonnegative");
  if (!prior.is_integral()) throw PreconditionError("simulate: prior must hold integer counts");
  if (auto v = prior.check("prior"); !v.empty()) throw PreconditionError(describe(v.front()));
  if (auto v = transition.check("transition"); !v.empty()) throw ModelError(describe(v.front()));
  if (transition.states() != prior.size()) throw DimensionError("simulate: prior/transition sizes differ");
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0 && transition.row_is_zero(i)) {
      throw ModelError("simulate: state " + std::to_string(i) +
                       " has mass but no outgoing transitions");
    }
  }
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    if (auto v = sensors[s].check("sensor"); !v.empty()) throw ModelError(describe(v.front()));
    if (sensors[s].states() != prior.size()) throw DimensionError("simulate: sensor row count differs");
  }

  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.marginals.push_back(prior);
  for (int t = 1; t <= horizon; ++t) {
    Matrix flow = sample_rows(rng, traj.marginals.back().mass(), transition.kernel());
    Vector next = flow.colwise().sum().transpose();
    for (Eigen::Index i = 0; i < next.size(); ++i) {
      if (next[i] > 0.0 && transition.row_is_zero(i) && t < horizon) {
        throw ModelError("simulate: mass reached state " + std::to_string(i) +
                         " which has no outgoing transitions");
      }
    }
    traj.transfer_plans.push_back({std::move(flow), t});

    std::vector<ObservationPlan> plans;
    std::vector<AggregateObservation> observed;
    for (std::size_t s = 0; s < sensors.size(); ++s) {
      Matrix assign = sample_rows(rng, next, sensors[s].kernel());
      observed.push_back({assign.colwise().sum().transpose(), t, static_cast<int>(s)});
      plans.push_back({std::move(assign), t, static_cast<int>(s)});
    }
    traj.observation_plans.push_back(std::move(plans));
    traj.observations.push_back(std::move(observed));
    traj.marginals.push_back(Marginal(std::move(next)));
  }
  return traj;
}

ProblemInstance make_instance(const Marginal& prior, const TransitionModel& transition,
                              const std::vector<ObservationModel>& sensors,
                              const Trajectory& trajectory) {
  ProblemInstance instance;
  instance.prior = prior;
  instance.transition = transition;
  instance.sensors = sensors;
  instance.observations = trajectory.observations;
  return instance;
}

TransitionModel build_gaussian_chain(int states, double sigma, double drift) {
  if (states < 1) throw PreconditionError("build_gaussian_chain: need at least one state");
  if (!(sigma > 0.0)) throw PreconditionError("build_gaussian_chain: sigma must be positive");
  Matrix kernel(states, states);
  for (int i = 1; i <= states; ++i) {
    for (int j = 1; j <= states; ++j) {
      const double d = static_cast<double>(j - i) - drift;
      kernel(i - 1, j - 1) = std::exp(-d * d / (2.0 * sigma * sigma));
    }
  }
  return TransitionModel(std::move(kernel), Normalization::renormalize_rows);
}

ObservationModel build_binned_observation(int states, int symbols, double sigma_b) {
  if (states < 1 || symbols < 1) {
    throw PreconditionError("build_binned_observation: need at least one state and symbol");
  }
  if (!(sigma_b > 0.0)) throw PreconditionError("build_binned_observation: sigma must be positive");
  Matrix kernel(states, symbols);
  for (int i = 1; i <= states; ++i) {
    const double centre = (i + 10.0) / 20.0;
    for (int k = 1; k <= symbols; ++k) {
      const double d = k - centre;
      kernel(i - 1, k - 1) = std::exp(-d * d / (2.0 * sigma_b * sigma_b));
    }
  }
  return ObservationModel(std::move(kernel), Normalization::renormalize_rows);
}

Vector apportion(const Vector& weights, std::int64_t total) {
  if (total < 0) throw PreconditionError("apportion: negative total");
  const double sum = weights.sum();
  if (!(sum > 0.0) || (weights.array() < 0.0).any()) {
    throw PreconditionError("apportion: weights must be nonnegative with positive sum");
  }
  const auto n = weights.size();
  Vector out(n);
  std::vector<double> remainder(static_cast<std::size_t>(n));
  std::int64_t assigned = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = std::floor(exact);
    remainder[static_cast<std::size_t>(i)] = exact - out[i];
    assigned += static_cast<std::int64_t>(out[i]);
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
  });
  for (std::int64_t k = 0; k < total - assigned; ++k) {
    out[order[static_cast<std::size_t>(k % n)]] += 1.0;
  }
  return out;
}

}  // namespace enflow

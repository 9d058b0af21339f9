#include "enflow/probe.hpp"

#include "enflow/errors.hpp"
#include "enflow/rng.hpp"

#include <algorithm>
#include <chrono>

namespace enflow {
namespace {

Matrix random_stochastic(Rng& rng, int rows, int cols) {
  Matrix k(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) k(i, j) = 0.05 + rng.uniform();
  }
  return k;
}

}  // namespace

ProblemInstance random_probe_instance(int states, int symbols, int horizon,
                                      std::uint64_t seed) {
  if (states < 1 || symbols < 1 || horizon < 1) {
    throw PreconditionError("probe: n, m and T must be positive");
  }
  Rng rng(seed);
  ProblemInstance inst;
  Vector prior(states);
  for (int i = 0; i < states; ++i) prior[i] = 1.0 + rng.uniform();
  prior *= 1000.0 / prior.sum();
  inst.prior = Marginal(prior);
  inst.transition =
      TransitionModel(random_stochastic(rng, states, states), Normalization::renormalize_rows);
  inst.sensors.emplace_back(random_stochastic(rng, states, symbols),
                            Normalization::renormalize_rows);
  for (int t = 1; t <= horizon; ++t) {
    Vector phi(symbols);
    for (int k = 0; k < symbols; ++k) phi[k] = 0.5 + rng.uniform();
    phi *= 1000.0 / phi.sum();
    inst.observations.push_back({AggregateObservation{phi, t, 0}});
  }
  return inst;
}

std::vector<ProbeRow> sweep_cost_probe(const ProbeOptions& options) {
  if (options.sweeps < 1 || options.warmup < 0) {
    throw PreconditionError("probe: need at least one timed sweep");
  }
  struct Point {
    int n, m, horizon;
    FlowSweeper sweeper;
    std::vector<double> seconds;
    long work_before;
  };
  EstimatorOptions est;
  est.log_domain = options.log_domain;
  std::vector<Point> points;
  for (int n : options.states) {
    for (int m : options.symbols) {
      for (int horizon : options.horizons) {
        points.push_back({n, m, horizon,
                          FlowSweeper(random_probe_instance(n, m, horizon, options.seed), est),
                          {}, 0});
      }
    }
  }
  for (auto& p : points) {
    for (int k = 0; k < options.warmup; ++k) p.sweeper.sweep();
    p.work_before = p.sweeper.work();
  }
  // Round robin over the grid, so that drifting machine load hits every
  // point alike instead of whichever happened to run during a slow patch.
  for (int k = 0; k < options.sweeps; ++k) {
    for (auto& p : points) {
      const auto start = std::chrono::steady_clock::now();
      p.sweeper.sweep();
      const auto stop = std::chrono::steady_clock::now();
      p.seconds.push_back(std::chrono::duration<double>(stop - start).count());
    }
  }
  std::vector<ProbeRow> rows;
  for (auto& p : points) {
    const long work = (p.sweeper.work() - p.work_before) / options.sweeps;
    auto mid = p.seconds.begin() + static_cast<std::ptrdiff_t>(p.seconds.size() / 2);
    std::nth_element(p.seconds.begin(), mid, p.seconds.end());
    rows.push_back({p.n, p.m, p.horizon, *mid, work});
  }
  return rows;
}

}  // namespace enflow

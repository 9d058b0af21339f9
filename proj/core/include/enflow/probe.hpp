#pragma once

#include "enflow/hmm_flow.hpp"

#include <cstdint>
#include <vector>

namespace enflow {

struct ProbeOptions {
  std::vector<int> states{25, 50, 100};
  std::vector<int> symbols{5};
  std::vector<int> horizons{10, 20, 40};
  int sweeps = 20;
  int warmup = 3;
  std::uint64_t seed = 1;
  LogDomain log_domain = LogDomain::automatic;
};

struct ProbeRow {
  int states = 0;
  int symbols = 0;
  int horizon = 0;
  /// Median wall time of one sweep.
  double seconds_per_sweep = 0.0;
  /// Multiply-adds in kernel products per sweep; deterministic.
  long work_per_sweep = 0;
};

/// Random strictly positive single-sensor instance with consistent masses.
ProblemInstance random_probe_instance(int states, int symbols, int horizon,
                                      std::uint64_t seed);

/// Times estimator sweeps over the (n, m, T) grid, rows ordered by n, m, T.
std::vector<ProbeRow> sweep_cost_probe(const ProbeOptions& options = {});

}  // namespace enflow

#pragma once

#include "enflow/hmm_flow.hpp"
#include "enflow/network.hpp"
#include "enflow/simulator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace enflow {

enum class ExperimentKind { particle_cloud, network };
enum class PriorMode { true_prior, uniform };

/// Drifting particle cloud observed through coarse position bins.
struct ParticleCloudConfig {
  int states = 100;
  int symbols = 5;
  int horizon = 50;
  long particles = 1000;
  /// Model that generates the data.
  double true_sigma = 0.5;
  double true_drift = 1.0;
  /// Mismatched model used for estimation.
  double model_sigma = 2.0;
  double model_drift = 0.0;
  double observation_sigma = 0.5;
  /// Initial cloud: discretized Gaussian over the 1-based state index,
  /// rounded to integer counts.
  double initial_centre = 15.0;
  double initial_spread = 3.0;
};

/// Agents walking on a directed street graph seen by detect/not-detect
/// sensors.
struct NetworkConfig {
  int horizon = 20;
  long agents = 100;
  NetworkEdge initial_edge{1, 3};
  /// Layout JSON; empty selects the bundled layout.
  std::string network_file;
  PriorMode prior = PriorMode::true_prior;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::particle_cloud;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  long max_sweeps = 100000;
  LogDomain log_domain = LogDomain::automatic;
  std::string output_dir = "out";
  ParticleCloudConfig particle_cloud;
  NetworkConfig network;

  /// Throws PreconditionError for out-of-range parameters.
  void check() const;
};

struct ParticleCloudResult {
  Trajectory truth;
  FlowEstimate with_true_prior;
  FlowEstimate with_uniform_prior;
  /// Prior propagated through the estimation model without observations.
  std::vector<Marginal> forward;
  /// ||uniform_t - true_t||_1 / N for t = 0..T
  std::vector<double> prior_gap;
  /// ||estimate_t - truth_t||_1 / N and ||forward_t - truth_t||_1 / N
  std::vector<double> estimate_error;
  std::vector<double> forward_error;
};

struct NetworkResult {
  NetworkModel network;
  Trajectory truth;
  FlowEstimate estimate;
  /// Total-variation distance between normalized truth and estimate, t = 0..T
  std::vector<double> tv_distance;
  /// Mean of tv_distance over t = 1..T
  double mean_tv = 0.0;
};

/// Initial integer cloud used by the particle-cloud experiment.
Marginal initial_cloud(const ParticleCloudConfig& config);

ParticleCloudResult run_particle_cloud(const ExperimentConfig& config);
NetworkResult run_network(const ExperimentConfig& config);

/// Write CSV grids, SVG panels and a summary JSON under config.output_dir.
/// Returns the paths written, in a fixed order.
std::vector<std::string> write_particle_cloud(const ParticleCloudResult& result,
                                              const ExperimentConfig& config);
std::vector<std::string> write_network(const NetworkResult& result,
                                       const ExperimentConfig& config);

/// Threads allowed by ENSEMBLE_FLOW_THREADS (default 2, minimum 1).
int thread_budget();

}  // namespace enflow

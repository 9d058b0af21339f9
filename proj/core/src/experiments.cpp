#include "enflow/experiments.hpp"

#include "enflow/errors.hpp"
#include "enflow/serialization.hpp"
#include "enflow/svg.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>

namespace enflow {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError("experiment config: " + message);
}

double l1_gap(const Vector& a, const Vector& b, double mass) {
  return (a - b).cwiseAbs().sum() / mass;
}

EstimatorOptions estimator_options(const ExperimentConfig& config) {
  EstimatorOptions opts;
  opts.tol = config.tol;
  opts.max_sweeps = config.max_sweeps;
  opts.log_domain = config.log_domain;
  return opts;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::vector<Vector> masses(const std::vector<Marginal>& marginals) {
  std::vector<Vector> out;
  for (const auto& m : marginals) out.push_back(m.mass());
  return out;
}

std::vector<Vector> sensor_counts(const Trajectory& traj, std::size_t sensor) {
  std::vector<Vector> out;
  for (const auto& row : traj.observations) out.push_back(row.at(sensor).counts);
  return out;
}

Json summary_of(const FlowEstimate& est) {
  return Json{{"sweeps", est.sweeps},
              {"residual", est.residual},
              {"objective", est.objective},
              {"zero_mass_states", est.zero_mass_states.size()}};
}

}  // namespace

void ExperimentConfig::check() const {
  require(tol > 0.0, "tol must be positive");
  require(max_sweeps >= 1, "max_sweeps must be at least 1");
  const auto& pc = particle_cloud;
  require(pc.states >= 1 && pc.symbols >= 1, "particle_cloud needs n >= 1 and m >= 1");
  require(pc.horizon >= 1, "particle_cloud horizon must be at least 1");
  require(pc.particles >= 1, "particle_cloud needs at least one particle");
  require(pc.true_sigma > 0.0 && pc.model_sigma > 0.0 && pc.observation_sigma > 0.0,
          "particle_cloud sigmas must be positive");
  require(pc.initial_spread > 0.0, "particle_cloud initial_spread must be positive");
  require(network.horizon >= 1, "network horizon must be at least 1");
  require(network.agents >= 1, "network needs at least one agent");
}

int thread_budget() {
  if (const char* env = std::getenv("ENSEMBLE_FLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min(v, 64L));
    return 1;
  }
  return 2;
}

Marginal initial_cloud(const ParticleCloudConfig& config) {
  Vector w(config.states);
  for (int i = 1; i <= config.states; ++i) {
    const double d = (i - config.initial_centre) / config.initial_spread;
    w[i - 1] = std::exp(-0.5 * d * d);
  }
  return Marginal(apportion(w, config.particles));
}

ParticleCloudResult run_particle_cloud(const ExperimentConfig& config) {
  config.check();
  const auto& pc = config.particle_cloud;
  const Marginal prior = initial_cloud(pc);
  const TransitionModel true_chain = build_gaussian_chain(pc.states, pc.true_sigma, pc.true_drift);
  const TransitionModel model_chain =
      build_gaussian_chain(pc.states, pc.model_sigma, pc.model_drift);
  const std::vector<ObservationModel> sensors{
      build_binned_observation(pc.states, pc.symbols, pc.observation_sigma)};

  ParticleCloudResult result;
  result.truth = simulate(prior, true_chain, sensors, pc.horizon, config.seed);
  const double mass = prior.total();
  const Marginal uniform(Vector::Constant(pc.states, mass / pc.states));
  const ProblemInstance with_true = make_instance(prior, model_chain, sensors, result.truth);
  const ProblemInstance with_uniform = make_instance(uniform, model_chain, sensors, result.truth);
  const EstimatorOptions opts = estimator_options(config);

  if (thread_budget() >= 2) {
    auto other = std::async(std::launch::async, [&] { return estimate_flow(with_uniform, opts); });
    result.with_true_prior = estimate_flow(with_true, opts);
    result.with_uniform_prior = other.get();
  } else {
    result.with_true_prior = estimate_flow(with_true, opts);
    result.with_uniform_prior = estimate_flow(with_uniform, opts);
  }
  result.forward = forward_propagate(prior, model_chain, pc.horizon);

  for (int t = 0; t <= pc.horizon; ++t) {
    const Vector& truth = result.truth.marginals[t].mass();
    const Vector& est = result.with_true_prior.marginals[t].mass();
    result.prior_gap.push_back(l1_gap(result.with_uniform_prior.marginals[t].mass(), est, mass));
    result.estimate_error.push_back(l1_gap(est, truth, mass));
    result.forward_error.push_back(l1_gap(result.forward[t].mass(), truth, mass));
  }
  return result;
}

NetworkResult run_network(const ExperimentConfig& config) {
  config.check();
  const auto& nc = config.network;
  NetworkResult result;
  result.network = nc.network_file.empty() ? build_paper_network()
                                           : network_from_json(read_json_file(nc.network_file));
  const TransitionModel true_chain = build_network_transitions(result.network, WeightMode::weighted);
  const TransitionModel model_chain = build_network_transitions(result.network, WeightMode::uniform);
  const auto sensors = build_sensor_models(result.network);
  if (sensors.empty()) throw ModelError("network: at least one sensor is required");

  const auto n = static_cast<Eigen::Index>(result.network.edges.size());
  Vector start = Vector::Zero(n);
  start[result.network.edge_index(nc.initial_edge.from, nc.initial_edge.to)] =
      static_cast<double>(nc.agents);
  const Marginal prior(start);
  result.truth = simulate(prior, true_chain, sensors, nc.horizon, config.seed);

  const Marginal estimation_prior =
      nc.prior == PriorMode::true_prior
          ? prior
          : Marginal(Vector::Constant(n, static_cast<double>(nc.agents) / static_cast<double>(n)));
  const ProblemInstance inst = make_instance(estimation_prior, model_chain, sensors, result.truth);
  result.estimate = estimate_flow_multi(inst, estimator_options(config));

  const double mass = static_cast<double>(nc.agents);
  double sum = 0.0;
  for (int t = 0; t <= nc.horizon; ++t) {
    const double tv = 0.5 * l1_gap(result.estimate.marginals[t].mass(),
                                   result.truth.marginals[t].mass(), mass);
    result.tv_distance.push_back(tv);
    if (t >= 1) sum += tv;
  }
  result.mean_tv = sum / nc.horizon;
  return result;
}

std::vector<std::string> write_particle_cloud(const ParticleCloudResult& result,
                                              const ExperimentConfig& config) {
  const std::string& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const std::string path = join(dir, name);
    write_text_file(path, contents);
    written.push_back(path);
  };

  const auto truth = masses(result.truth.marginals);
  const auto observed = sensor_counts(result.truth, 0);
  const auto est_true = masses(result.with_true_prior.marginals);
  const auto est_uniform = masses(result.with_uniform_prior.marginals);
  emit("truth.csv", grid_csv(truth, "t", "state_", 0));
  emit("observations.csv", grid_csv(observed, "t", "symbol_", 1));
  emit("estimate_true_prior.csv", grid_csv(est_true, "t", "state_", 0));
  emit("estimate_uniform_prior.csv", grid_csv(est_uniform, "t", "state_", 0));
  emit("forward_propagation.csv", grid_csv(masses(result.forward), "t", "state_", 0));
  emit("trace_true_prior.csv", trace_csv(result.with_true_prior.dual_objective_trace));
  emit("trace_uniform_prior.csv", trace_csv(result.with_uniform_prior.dual_objective_trace));

  double scale = 0.0;
  for (const auto& v : truth) scale = std::max(scale, v.maxCoeff());
  const std::vector<std::string> panels{
      heatmap_svg(truth, "hidden particles", scale),
      heatmap_svg(observed, "observations"),
      heatmap_svg(est_true, "estimate, true prior", scale),
      heatmap_svg(est_uniform, "estimate, uniform prior", scale)};
  emit("truth.svg", panels[0]);
  emit("observations.svg", panels[1]);
  emit("estimate_true_prior.svg", panels[2]);
  emit("estimate_uniform_prior.svg", panels[3]);
  emit("particle_cloud.svg", tile_svg(panels, 2, 420.0, 320.0));

  Json summary;
  summary["config"] = to_json(config);
  summary["true_prior"] = summary_of(result.with_true_prior);
  summary["uniform_prior"] = summary_of(result.with_uniform_prior);
  summary["prior_gap_l1"] = result.prior_gap;
  summary["estimate_error_l1"] = result.estimate_error;
  summary["forward_error_l1"] = result.forward_error;
  emit("summary.json", summary.dump(2) + "\n");
  return written;
}

std::vector<std::string> write_network(const NetworkResult& result, const ExperimentConfig& config) {
  const std::string& dir = config.output_dir;
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const std::string path = join(dir, name);
    write_text_file(path, contents);
    written.push_back(path);
  };

  const auto truth = masses(result.truth.marginals);
  const auto estimate = masses(result.estimate.marginals);
  emit("truth.csv", grid_csv(truth, "t", "edge_", 0));
  emit("estimate.csv", grid_csv(estimate, "t", "edge_", 0));
  std::vector<Vector> detected;
  for (const auto& row : result.truth.observations) {
    Vector d(static_cast<Eigen::Index>(row.size()));
    for (std::size_t s = 0; s < row.size(); ++s) d[static_cast<Eigen::Index>(s)] = row[s].counts[0];
    detected.push_back(std::move(d));
  }
  emit("detections.csv", grid_csv(detected, "t", "sensor_", 1));
  emit("trace.csv", trace_csv(result.estimate.dual_objective_trace));
  emit("network.json", to_json(result.network).dump(2) + "\n");

  const double max_mass = static_cast<double>(config.network.agents);
  std::vector<std::string> panels;
  const int horizon = config.network.horizon;
  for (int t : {0, horizon / 4, horizon / 2, (3 * horizon) / 4, horizon}) {
    panels.push_back(network_svg(result.network, truth[t], "truth t=" + std::to_string(t), max_mass));
    panels.push_back(network_svg(result.network, estimate[t], "estimate t=" + std::to_string(t), max_mass));
  }
  emit("network.svg", tile_svg(panels, 2, 420.0, 320.0));

  Json summary;
  summary["config"] = to_json(config);
  summary["estimate"] = summary_of(result.estimate);
  summary["tv_distance"] = result.tv_distance;
  summary["mean_tv"] = result.mean_tv;
  emit("summary.json", summary.dump(2) + "\n");
  return written;
}

}  // namespace enflow

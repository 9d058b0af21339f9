// enflow: command-line front end for the ensemble flow library.
//
// Every subcommand writes its outputs into --out (created if needed) and
// prints a JSON list of the files it wrote. Failures print an error JSON on
// stderr and exit with 2 (bad input) or 3 (solver failure).

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "enflow/bridge.hpp"
#include "enflow/divergence.hpp"
#include "enflow/errors.hpp"
#include "enflow/experiments.hpp"
#include "enflow/hmm_flow.hpp"
#include "enflow/oracle.hpp"
#include "enflow/probe.hpp"
#include "enflow/serialization.hpp"
#include "enflow/simulator.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

using namespace enflow;

namespace {

struct Common {
  double tol = 1e-9;
  long max_sweeps = 100000;
  std::uint64_t seed = 1;
  std::string log_domain = "auto";
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c, bool solver, bool seeded) {
  if (solver) {
    cmd->add_option("--tol", c.tol, "Convergence tolerance")->capture_default_str();
    cmd->add_option("--max-sweeps", c.max_sweeps, "Iteration cap")->capture_default_str();
    cmd->add_option("--log-domain", c.log_domain, "auto, on or off")
        ->check(CLI::IsMember({"auto", "on", "off"}))
        ->capture_default_str();
  }
  if (seeded) cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  void text(const std::string& name, const std::string& contents) {
    const auto path = (std::filesystem::path(dir_) / name).string();
    write_text_file(path, contents);
    written_.push_back(path);
  }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }
  void adopt(const std::vector<std::string>& paths) {
    written_.insert(written_.end(), paths.begin(), paths.end());
  }
  void report() const { std::cout << Json{{"written", written_}}.dump(2) << "\n"; }

 private:
  std::string dir_;
  std::vector<std::string> written_;
};

ProblemInstance load_model(const std::string& path) {
  // The observations of a model file are ignored, so accept an empty grid.
  Json j = read_json_file(path);
  if (!j.contains("observations")) j["observations"] = Json::array();
  return instance_from_json(j);
}

void run_simulate(const std::string& input, int horizon, const Common& c) {
  const ProblemInstance model = load_model(input);
  const Trajectory traj = simulate(model.prior, model.transition, model.sensors, horizon, c.seed);
  const ProblemInstance inst = make_instance(model.prior, model.transition, model.sensors, traj);
  Outputs out(c.out);
  out.json("trajectory.json", to_json(traj));
  out.json("instance.json", to_json(inst));
  out.text("marginals.csv", marginals_csv(traj.marginals));
  for (std::size_t s = 0; s < model.sensors.size(); ++s) {
    std::vector<Vector> rows;
    for (const auto& row : traj.observations) rows.push_back(row[s].counts);
    out.text("observations_sensor" + std::to_string(s + 1) + ".csv", grid_csv(rows, "t", "symbol_", 1));
  }
  out.report();
}

void run_estimate(const std::string& input, const std::string& init, const Common& c) {
  const ProblemInstance inst = instance_from_json(read_json_file(input));
  EstimatorOptions opts;
  opts.tol = c.tol;
  opts.max_sweeps = c.max_sweeps;
  opts.log_domain = log_domain_from_string(c.log_domain);
  if (!init.empty()) {
    const Json j = read_json_file(init);
    opts.initial = dual_from_json(j.contains("dual") ? j["dual"] : j, j.contains("dual") ? "/dual" : "");
  }
  const FlowEstimate est =
      inst.sensor_count() == 1 ? estimate_flow(inst, opts) : estimate_flow_multi(inst, opts);
  Outputs out(c.out);
  out.json("estimate.json", to_json(est));
  out.text("marginals.csv", marginals_csv(est.marginals));
  out.text("trace.csv", trace_csv(est.dual_objective_trace));
  out.report();
}

void run_bridge(const std::string& input, const Common& c) {
  const BridgeProblem p = bridge_problem_from_json(read_json_file(input));
  BridgeOptions opts;
  opts.tol = c.tol;
  opts.max_iters = c.max_sweeps;
  const BridgeSolution sol = solve_chain(p.mu0, p.muT, p.transition, p.horizon, opts);
  Outputs out(c.out);
  out.json("bridge.json", to_json(sol));
  out.text("marginals.csv", marginals_csv(sol.marginals));
  out.report();
}

void run_oracle(const std::string& input, const std::string& method, const Common& c) {
  const Json j = read_json_file(input);
  const std::string kind = schema_of(j);
  OracleResult result;
  if (method == "enumerate") {
    const BridgeProblem p = bridge_problem_from_json(j);
    if (p.horizon != 1) throw PreconditionError("oracle: enumeration needs a single-step problem");
    result = brute_force_ml_plan(p.mu0, p.transition, p.muT);
  } else if (kind == schema::bridge_problem) {
    const BridgeProblem p = bridge_problem_from_json(j);
    result = generic_kl_solver(p.mu0, p.muT, p.transition, p.horizon);
  } else {
    result = generic_kl_solver(instance_from_json(j));
  }
  Outputs out(c.out);
  out.json("oracle.json", to_json(result));
  out.report();
}

void run_likelihood(const std::string& input, const Common& c) {
  const LikelihoodProblem p = likelihood_problem_from_json(read_json_file(input));
  Outputs out(c.out);
  out.json("likelihood.json", to_json(likelihood_bounds(p.prior, p.transition, p.plan)));
  out.report();
}

void run_probe(ProbeOptions opts, const Common& c) {
  opts.seed = c.seed;
  opts.log_domain = log_domain_from_string(c.log_domain);
  const auto rows = sweep_cost_probe(opts);
  std::ostringstream work, timing;
  work << "states,symbols,horizon,work_per_sweep\n";
  timing << "states,symbols,horizon,seconds_per_sweep\n";
  for (const auto& r : rows) {
    work << r.states << ',' << r.symbols << ',' << r.horizon << ',' << r.work_per_sweep << '\n';
    timing << r.states << ',' << r.symbols << ',' << r.horizon << ','
           << format_number(r.seconds_per_sweep) << '\n';
  }
  Outputs out(c.out);
  out.json("probe.json", to_json(rows));
  out.text("probe_work.csv", work.str());
  // Wall-clock numbers; the only output that differs between identical runs.
  out.text("probe_timing.csv", timing.str());
  out.report();
}

void run_experiment(const std::string& target, const Common& c, const CLI::App& cmd) {
  ExperimentConfig config;
  if (target == "particle_cloud") {
    config.kind = ExperimentKind::particle_cloud;
  } else if (target == "network") {
    config.kind = ExperimentKind::network;
  } else {
    config = config_from_json(read_json_file(target));
  }
  // Flags given explicitly override the config file.
  if (cmd.count("--seed") || target == "particle_cloud" || target == "network") config.seed = c.seed;
  if (cmd.count("--tol")) config.tol = c.tol;
  if (cmd.count("--max-sweeps")) config.max_sweeps = c.max_sweeps;
  if (cmd.count("--log-domain")) config.log_domain = log_domain_from_string(c.log_domain);
  if (cmd.count("--out") || target == "particle_cloud" || target == "network") config.output_dir = c.out;
  config.check();

  Outputs out(config.output_dir);
  if (config.kind == ExperimentKind::particle_cloud) {
    out.adopt(write_particle_cloud(run_particle_cloud(config), config));
  } else {
    out.adopt(write_network(run_network(config), config));
  }
  out.json("config.json", to_json(config));
  out.report();
}

int fail(const std::exception& e, int code) {
  std::cerr << error_to_json(e).dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Most likely flow of an ensemble over a hidden Markov chain"};
  app.require_subcommand(1);
  Common common;

  std::string input;
  int horizon = 1;
  auto* simulate_cmd = app.add_subcommand("simulate", "Sample a trajectory from a model file");
  simulate_cmd->add_option("model", input, "problem_instance JSON (observations ignored)")->required();
  simulate_cmd->add_option("--horizon", horizon, "Number of steps T")->required()->check(CLI::NonNegativeNumber);
  add_common(simulate_cmd, common, false, true);

  std::string init;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the most likely flow");
  estimate_cmd->add_option("instance", input, "problem_instance JSON")->required();
  estimate_cmd->add_option("--init", init, "Starting dual state (estimate JSON or dual object)");
  add_common(estimate_cmd, common, true, false);

  auto* bridge_cmd = app.add_subcommand("bridge", "Solve a bridge between two marginals");
  bridge_cmd->add_option("problem", input, "bridge_problem JSON")->required();
  add_common(bridge_cmd, common, true, false);

  std::string method = "newton";
  auto* oracle_cmd = app.add_subcommand("oracle", "Reference solution of a small problem");
  oracle_cmd->add_option("problem", input, "bridge_problem or problem_instance JSON")->required();
  oracle_cmd->add_option("--method", method, "newton or enumerate")
      ->check(CLI::IsMember({"newton", "enumerate"}))
      ->capture_default_str();
  add_common(oracle_cmd, common, false, false);

  auto* likelihood_cmd = app.add_subcommand("likelihood", "Exact likelihood and its bounds");
  likelihood_cmd->add_option("problem", input, "likelihood_problem JSON")->required();
  add_common(likelihood_cmd, common, false, false);

  ProbeOptions probe;
  auto* probe_cmd = app.add_subcommand("probe", "Time estimator sweeps over an (n, m, T) grid");
  probe_cmd->add_option("--states", probe.states, "Values of n")->delimiter(',')->capture_default_str();
  probe_cmd->add_option("--symbols", probe.symbols, "Values of m")->delimiter(',')->capture_default_str();
  probe_cmd->add_option("--horizons", probe.horizons, "Values of T")->delimiter(',')->capture_default_str();
  probe_cmd->add_option("--sweeps", probe.sweeps, "Timed sweeps per point")->capture_default_str();
  add_common(probe_cmd, common, true, true);

  std::string target;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run a bundled experiment");
  experiment_cmd->add_option("target", target, "particle_cloud, network, or an experiment_config JSON")->required();
  add_common(experiment_cmd, common, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate_cmd) run_simulate(input, horizon, common);
    if (*estimate_cmd) run_estimate(input, init, common);
    if (*bridge_cmd) run_bridge(input, common);
    if (*oracle_cmd) run_oracle(input, method, common);
    if (*likelihood_cmd) run_likelihood(input, common);
    if (*probe_cmd) run_probe(probe, common);
    if (*experiment_cmd) run_experiment(target, common, *experiment_cmd);
  } catch (const SchemaError& e) {
    return fail(e, 2);
  } catch (const PreconditionError& e) {
    return fail(e, 2);
  } catch (const DimensionError& e) {
    return fail(e, 2);
  } catch (const ModelError& e) {
    return fail(e, 2);
  } catch (const Error& e) {
    return fail(e, 3);
  } catch (const std::exception& e) {
    return fail(e, 1);
  }
  return 0;
}

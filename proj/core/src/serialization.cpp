#include "enflow/serialization.hpp"

#include "enflow/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace enflow {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string child(const std::string& path, const std::string& key) {
  return path + "/" + key;
}
std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(child(path, key), "missing required field");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long>();
}

std::uint64_t unsigned_integer(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw SchemaError(path, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected true or false");
  return j.get<bool>();
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

Json header(const char* name) {
  Json j;
  j["schema"] = name;
  j["version"] = kSchemaVersion;
  return j;
}

Json marginals_to_json(const std::vector<Marginal>& marginals) {
  Json out = Json::array();
  for (const auto& m : marginals) out.push_back(vector_to_json(m.mass()));
  return out;
}

std::vector<Marginal> marginals_from_json(const Json& j, const std::string& path) {
  std::vector<Marginal> out;
  const Json& arr = array(j, path);
  for (std::size_t t = 0; t < arr.size(); ++t) {
    out.push_back(Marginal::unchecked(vector_from_json(arr[t], child(path, t))));
  }
  return out;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

Json matrix_grid_to_json(const std::vector<std::vector<Matrix>>& grid) {
  Json out = Json::array();
  for (const auto& row : grid) out.push_back(matrices_to_json(row));
  return out;
}

Json edge_to_json(const NetworkEdge& e) { return Json::array({e.from, e.to}); }

NetworkEdge edge_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [from, to]");
  return {static_cast<int>(integer(j[0], child(path, 0))),
          static_cast<int>(integer(j[1], child(path, 1)))};
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    data.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  const long rows = integer(field(j, path, "rows"), child(path, "rows"));
  const long cols = integer(field(j, path, "cols"), child(path, "cols"));
  if (rows < 0 || cols < 0) throw SchemaError(path, "negative matrix dimension");
  const std::string data_path = child(path, "data");
  const Json& data = array(field(j, path, "data"), data_path);
  if (static_cast<long>(data.size()) != rows) {
    throw SchemaError(data_path, "expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const std::string row_path = child(data_path, static_cast<std::size_t>(i));
    const Json& row = array(data[static_cast<std::size_t>(i)], row_path);
    if (static_cast<long>(row.size()) != cols) {
      throw SchemaError(row_path, "expected " + std::to_string(cols) + " columns");
    }
    for (long k = 0; k < cols; ++k) {
      m(i, k) = number(row[static_cast<std::size_t>(k)], child(row_path, static_cast<std::size_t>(k)));
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j, const std::string& path) {
  const Json& arr = array(j, path);
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(arr[i], child(path, i));
  return v;
}

Json log_vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == kNegInf) {
      out.push_back(nullptr);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

Vector log_vector_from_json(const Json& j, const std::string& path) {
  const Json& arr = array(j, path);
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = arr[i].is_null() ? kNegInf : number(arr[i], child(path, i));
  }
  return v;
}

std::string schema_of(const Json& j) {
  return text(field(j, "", "schema"), "/schema");
}

void require_schema(const Json& j, const char* name) {
  const std::string found = schema_of(j);
  if (found != name) {
    throw SchemaError("/schema", "expected \"" + std::string(name) + "\", found \"" + found + "\"");
  }
  const long version = integer(field(j, "", "version"), "/version");
  if (version != kSchemaVersion) {
    throw SchemaError("/version", "unsupported version " + std::to_string(version));
  }
}

Json to_json(const ProblemInstance& instance) {
  Json j = header(schema::problem_instance);
  j["prior"] = vector_to_json(instance.prior.mass());
  j["transition"] = matrix_to_json(instance.transition.kernel());
  Json sensors = Json::array();
  for (const auto& s : instance.sensors) sensors.push_back(matrix_to_json(s.kernel()));
  j["sensors"] = std::move(sensors);
  Json obs = Json::array();
  for (const auto& row : instance.observations) {
    Json per_sensor = Json::array();
    for (const auto& o : row) per_sensor.push_back(vector_to_json(o.counts));
    obs.push_back(std::move(per_sensor));
  }
  j["observations"] = std::move(obs);
  return j;
}

ProblemInstance instance_from_json(const Json& j) {
  require_schema(j, schema::problem_instance);
  bool normalize = false;
  if (const Json* f = optional_field(j, "", "normalize")) normalize = boolean(*f, "/normalize");

  ProblemInstance inst;
  inst.prior = Marginal::unchecked(vector_from_json(field(j, "", "prior"), "/prior"));
  const Matrix a = matrix_from_json(field(j, "", "transition"), "/transition");
  inst.transition = normalize ? TransitionModel(a, Normalization::renormalize_rows)
                              : TransitionModel::unchecked(a);
  const Json& sensors = array(field(j, "", "sensors"), "/sensors");
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    const Matrix b = matrix_from_json(sensors[s], child("/sensors", s));
    inst.sensors.push_back(normalize ? ObservationModel(b, Normalization::renormalize_rows)
                                     : ObservationModel::unchecked(b));
  }
  const Json& obs = array(field(j, "", "observations"), "/observations");
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const std::string row_path = child("/observations", t);
    const Json& row = array(obs[t], row_path);
    if (row.size() != sensors.size()) {
      throw SchemaError(row_path, "expected one count vector per sensor (" +
                                      std::to_string(sensors.size()) + ")");
    }
    std::vector<AggregateObservation> per_sensor;
    for (std::size_t s = 0; s < row.size(); ++s) {
      per_sensor.push_back({vector_from_json(row[s], child(row_path, s)),
                            static_cast<int>(t) + 1, static_cast<int>(s)});
    }
    inst.observations.push_back(std::move(per_sensor));
  }
  return inst;
}

Json to_json(const BridgeProblem& problem) {
  Json j = header(schema::bridge_problem);
  j["mu0"] = vector_to_json(problem.mu0.mass());
  j["muT"] = vector_to_json(problem.muT.mass());
  j["transition"] = matrix_to_json(problem.transition.kernel());
  j["horizon"] = problem.horizon;
  return j;
}

BridgeProblem bridge_problem_from_json(const Json& j) {
  require_schema(j, schema::bridge_problem);
  BridgeProblem p;
  p.mu0 = Marginal(vector_from_json(field(j, "", "mu0"), "/mu0"));
  p.muT = Marginal(vector_from_json(field(j, "", "muT"), "/muT"));
  p.transition = TransitionModel(matrix_from_json(field(j, "", "transition"), "/transition"));
  p.horizon = static_cast<int>(integer(field(j, "", "horizon"), "/horizon"));
  return p;
}

Json to_json(const LikelihoodProblem& problem) {
  Json j = header(schema::likelihood_problem);
  j["prior"] = vector_to_json(problem.prior.mass());
  j["transition"] = matrix_to_json(problem.transition.kernel());
  j["plan"] = matrix_to_json(problem.plan);
  return j;
}

LikelihoodProblem likelihood_problem_from_json(const Json& j) {
  require_schema(j, schema::likelihood_problem);
  LikelihoodProblem p;
  p.prior = Marginal(vector_from_json(field(j, "", "prior"), "/prior"));
  p.transition = TransitionModel(matrix_from_json(field(j, "", "transition"), "/transition"));
  p.plan = matrix_from_json(field(j, "", "plan"), "/plan");
  return p;
}

Json to_json(const Trajectory& trajectory) {
  Json j = header(schema::trajectory);
  j["seed"] = trajectory.seed;
  j["marginals"] = marginals_to_json(trajectory.marginals);
  Json transfer = Json::array();
  for (const auto& p : trajectory.transfer_plans) transfer.push_back(matrix_to_json(p.flow));
  j["transfer_plans"] = std::move(transfer);
  Json plans = Json::array();
  for (const auto& row : trajectory.observation_plans) {
    Json per_sensor = Json::array();
    for (const auto& p : row) per_sensor.push_back(matrix_to_json(p.assignment));
    plans.push_back(std::move(per_sensor));
  }
  j["observation_plans"] = std::move(plans);
  Json obs = Json::array();
  for (const auto& row : trajectory.observations) {
    Json per_sensor = Json::array();
    for (const auto& o : row) per_sensor.push_back(vector_to_json(o.counts));
    obs.push_back(std::move(per_sensor));
  }
  j["observations"] = std::move(obs);
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  require_schema(j, schema::trajectory);
  Trajectory traj;
  traj.seed = unsigned_integer(field(j, "", "seed"), "/seed");
  traj.marginals = marginals_from_json(field(j, "", "marginals"), "/marginals");
  const Json& transfer = array(field(j, "", "transfer_plans"), "/transfer_plans");
  for (std::size_t t = 0; t < transfer.size(); ++t) {
    traj.transfer_plans.push_back(
        {matrix_from_json(transfer[t], child("/transfer_plans", t)), static_cast<int>(t) + 1});
  }
  const Json& plans = array(field(j, "", "observation_plans"), "/observation_plans");
  for (std::size_t t = 0; t < plans.size(); ++t) {
    const std::string row_path = child("/observation_plans", t);
    std::vector<ObservationPlan> row;
    const Json& arr = array(plans[t], row_path);
    for (std::size_t s = 0; s < arr.size(); ++s) {
      row.push_back({matrix_from_json(arr[s], child(row_path, s)), static_cast<int>(t) + 1,
                     static_cast<int>(s)});
    }
    traj.observation_plans.push_back(std::move(row));
  }
  const Json& obs = array(field(j, "", "observations"), "/observations");
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const std::string row_path = child("/observations", t);
    std::vector<AggregateObservation> row;
    const Json& arr = array(obs[t], row_path);
    for (std::size_t s = 0; s < arr.size(); ++s) {
      row.push_back({vector_from_json(arr[s], child(row_path, s)), static_cast<int>(t) + 1,
                     static_cast<int>(s)});
    }
    traj.observations.push_back(std::move(row));
  }
  if (traj.marginals.size() != traj.transfer_plans.size() + 1 ||
      traj.observations.size() != traj.transfer_plans.size()) {
    throw SchemaError("/marginals", "expected T+1 marginals for T transfer plans and observations");
  }
  return traj;
}

Json to_json(const DualState& dual) {
  Json j;
  j["log_u1"] = log_vector_to_json(dual.log_u1);
  Json v = Json::array();
  for (const auto& row : dual.log_v) {
    Json per_sensor = Json::array();
    for (const auto& x : row) per_sensor.push_back(log_vector_to_json(x));
    v.push_back(std::move(per_sensor));
  }
  j["log_v"] = std::move(v);
  Json y = Json::array();
  for (const auto& x : dual.log_y) y.push_back(log_vector_to_json(x));
  j["log_y"] = std::move(y);
  Json w = Json::array();
  for (const auto& x : dual.log_w) w.push_back(log_vector_to_json(x));
  j["log_w"] = std::move(w);
  return j;
}

DualState dual_from_json(const Json& j, const std::string& path) {
  DualState d;
  d.log_u1 = log_vector_from_json(field(j, path, "log_u1"), child(path, "log_u1"));
  const std::string v_path = child(path, "log_v");
  const Json& v = array(field(j, path, "log_v"), v_path);
  for (std::size_t t = 0; t < v.size(); ++t) {
    const std::string row_path = child(v_path, t);
    const Json& row = array(v[t], row_path);
    std::vector<Vector> per_sensor;
    for (std::size_t s = 0; s < row.size(); ++s) {
      per_sensor.push_back(log_vector_from_json(row[s], child(row_path, s)));
    }
    d.log_v.push_back(std::move(per_sensor));
  }
  for (const char* key : {"log_y", "log_w"}) {
    const Json* f = optional_field(j, path, key);
    if (!f) continue;
    const std::string p = child(path, key);
    auto& target = std::string(key) == "log_y" ? d.log_y : d.log_w;
    const Json& arr = array(*f, p);
    for (std::size_t t = 0; t < arr.size(); ++t) target.push_back(log_vector_from_json(arr[t], child(p, t)));
  }
  return d;
}

Json to_json(const FlowEstimate& estimate) {
  Json j = header(schema::flow_estimate);
  j["objective"] = estimate.objective;
  j["residual"] = estimate.residual;
  j["sweeps"] = estimate.sweeps;
  j["marginals"] = marginals_to_json(estimate.marginals);
  std::vector<Matrix> transfer;
  for (const auto& p : estimate.transfer_plans) transfer.push_back(p.flow);
  j["transfer_plans"] = matrices_to_json(transfer);
  std::vector<std::vector<Matrix>> observation;
  for (const auto& row : estimate.observation_plans) {
    std::vector<Matrix> per_sensor;
    for (const auto& p : row) per_sensor.push_back(p.assignment);
    observation.push_back(std::move(per_sensor));
  }
  j["observation_plans"] = matrix_grid_to_json(observation);
  j["dual"] = to_json(estimate.dual);
  j["dual_objective_trace"] = estimate.dual_objective_trace;
  Json zeros = Json::array();
  for (const auto& [t, i] : estimate.zero_mass_states) zeros.push_back(Json::array({t, i}));
  j["zero_mass_states"] = std::move(zeros);
  return j;
}

Json to_json(const BridgeSolution& solution) {
  Json j = header(schema::bridge_solution);
  j["objective"] = solution.objective;
  j["residual"] = solution.residual;
  j["iterations"] = solution.iterations;
  j["marginals"] = marginals_to_json(solution.marginals);
  std::vector<Matrix> plans;
  for (const auto& p : solution.plans) plans.push_back(p.flow);
  j["plans"] = matrices_to_json(plans);
  return j;
}

Json to_json(const OracleResult& result) {
  Json j = header(schema::oracle_result);
  j["method"] = result.method;
  j["objective"] = result.objective;
  j["constraint_violation"] = result.constraint_violation;
  j["stationarity"] = result.stationarity;
  j["iterations"] = result.iterations;
  j["marginals"] = marginals_to_json(result.marginals);
  j["transfer_plans"] = matrices_to_json(result.transfer_plans);
  j["observation_plans"] = matrix_grid_to_json(result.observation_plans);
  if (result.integer_plan.size() > 0) {
    j["integer_plan"] = matrix_to_json(result.integer_plan);
    j["log_likelihood"] = result.log_likelihood;
    j["candidates"] = result.candidates;
  }
  return j;
}

Json to_json(const LikelihoodReport& report) {
  Json j = header(schema::likelihood_report);
  j["exact_log_likelihood"] = report.exact_log_likelihood;
  j["kl_rate"] = report.kl_rate;
  j["upper_slack"] = report.upper_slack;
  j["lower_slack"] = report.lower_slack;
  j["n_particles"] = report.n_particles;
  return j;
}

Json to_json(const std::vector<ProbeRow>& rows) {
  Json j = header(schema::probe_table);
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back({{"states", r.states},
                   {"symbols", r.symbols},
                   {"horizon", r.horizon},
                   {"work_per_sweep", r.work_per_sweep}});
  }
  j["rows"] = std::move(arr);
  return j;
}

Json to_json(const NetworkModel& network) {
  Json j = header(schema::network);
  Json nodes = Json::array();
  for (const auto& n : network.nodes) nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  j["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& e : network.edges) edges.push_back(edge_to_json(e));
  j["edges"] = std::move(edges);
  Json sensors = Json::array();
  for (const auto& s : network.sensors) sensors.push_back(Json::array({s.x, s.y}));
  j["sensors"] = std::move(sensors);
  Json preferred = Json::array();
  for (const auto& e : network.preferred) preferred.push_back(edge_to_json(e));
  j["preferred"] = std::move(preferred);
  return j;
}

NetworkModel network_from_json(const Json& j) {
  require_schema(j, schema::network);
  NetworkModel net;
  const Json& nodes = array(field(j, "", "nodes"), "/nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = child("/nodes", i);
    net.nodes.push_back({static_cast<int>(integer(field(nodes[i], p, "id"), child(p, "id"))),
                         number(field(nodes[i], p, "x"), child(p, "x")),
                         number(field(nodes[i], p, "y"), child(p, "y"))});
  }
  const Json& edges = array(field(j, "", "edges"), "/edges");
  for (std::size_t i = 0; i < edges.size(); ++i) net.edges.push_back(edge_from_json(edges[i], child("/edges", i)));
  const Json& sensors = array(field(j, "", "sensors"), "/sensors");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const std::string p = child("/sensors", i);
    if (!sensors[i].is_array() || sensors[i].size() != 2) throw SchemaError(p, "expected [x, y]");
    net.sensors.push_back({number(sensors[i][0], child(p, 0)), number(sensors[i][1], child(p, 1))});
  }
  if (const Json* f = optional_field(j, "", "preferred")) {
    const Json& arr = array(*f, "/preferred");
    for (std::size_t i = 0; i < arr.size(); ++i) net.preferred.push_back(edge_from_json(arr[i], child("/preferred", i)));
  }
  net.check();
  return net;
}

std::string to_string(LogDomain mode) {
  switch (mode) {
    case LogDomain::automatic: return "auto";
    case LogDomain::on: return "on";
    case LogDomain::off: return "off";
  }
  return "auto";
}

LogDomain log_domain_from_string(const std::string& value) {
  if (value == "auto" || value == "automatic") return LogDomain::automatic;
  if (value == "on") return LogDomain::on;
  if (value == "off") return LogDomain::off;
  throw PreconditionError("log domain must be auto, on or off (got \"" + value + "\")");
}

Json to_json(const ExperimentConfig& config) {
  Json j = header(schema::experiment_config);
  j["kind"] = config.kind == ExperimentKind::particle_cloud ? "particle_cloud" : "network";
  j["seed"] = config.seed;
  j["tol"] = config.tol;
  j["max_sweeps"] = config.max_sweeps;
  j["log_domain"] = to_string(config.log_domain);
  j["output_dir"] = config.output_dir;
  const auto& pc = config.particle_cloud;
  j["particle_cloud"] = {{"states", pc.states},
                         {"symbols", pc.symbols},
                         {"horizon", pc.horizon},
                         {"particles", pc.particles},
                         {"true_sigma", pc.true_sigma},
                         {"true_drift", pc.true_drift},
                         {"model_sigma", pc.model_sigma},
                         {"model_drift", pc.model_drift},
                         {"observation_sigma", pc.observation_sigma},
                         {"initial_centre", pc.initial_centre},
                         {"initial_spread", pc.initial_spread}};
  const auto& nw = config.network;
  j["network"] = {{"horizon", nw.horizon},
                  {"agents", nw.agents},
                  {"initial_edge", edge_to_json(nw.initial_edge)},
                  {"network_file", nw.network_file},
                  {"prior", nw.prior == PriorMode::true_prior ? "true" : "uniform"}};
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  require_schema(j, schema::experiment_config);
  ExperimentConfig c;
  const std::string kind = text(field(j, "", "kind"), "/kind");
  if (kind == "particle_cloud") {
    c.kind = ExperimentKind::particle_cloud;
  } else if (kind == "network") {
    c.kind = ExperimentKind::network;
  } else {
    throw SchemaError("/kind", "expected \"particle_cloud\" or \"network\"");
  }
  if (const Json* f = optional_field(j, "", "seed")) c.seed = unsigned_integer(*f, "/seed");
  if (const Json* f = optional_field(j, "", "tol")) c.tol = number(*f, "/tol");
  if (const Json* f = optional_field(j, "", "max_sweeps")) c.max_sweeps = integer(*f, "/max_sweeps");
  if (const Json* f = optional_field(j, "", "log_domain")) {
    try {
      c.log_domain = log_domain_from_string(text(*f, "/log_domain"));
    } catch (const PreconditionError& e) {
      throw SchemaError("/log_domain", e.what());
    }
  }
  if (const Json* f = optional_field(j, "", "output_dir")) c.output_dir = text(*f, "/output_dir");

  if (const Json* pc = optional_field(j, "", "particle_cloud")) {
    const std::string p = "/particle_cloud";
    auto& o = c.particle_cloud;
    auto get_int = [&](const char* key, int& out) {
      if (const Json* f = optional_field(*pc, p, key)) out = static_cast<int>(integer(*f, child(p, key)));
    };
    auto get_num = [&](const char* key, double& out) {
      if (const Json* f = optional_field(*pc, p, key)) out = number(*f, child(p, key));
    };
    get_int("states", o.states);
    get_int("symbols", o.symbols);
    get_int("horizon", o.horizon);
    if (const Json* f = optional_field(*pc, p, "particles")) o.particles = integer(*f, child(p, "particles"));
    get_num("true_sigma", o.true_sigma);
    get_num("true_drift", o.true_drift);
    get_num("model_sigma", o.model_sigma);
    get_num("model_drift", o.model_drift);
    get_num("observation_sigma", o.observation_sigma);
    get_num("initial_centre", o.initial_centre);
    get_num("initial_spread", o.initial_spread);
  }
  if (const Json* nw = optional_field(j, "", "network")) {
    const std::string p = "/network";
    auto& o = c.network;
    if (const Json* f = optional_field(*nw, p, "horizon")) o.horizon = static_cast<int>(integer(*f, child(p, "horizon")));
    if (const Json* f = optional_field(*nw, p, "agents")) o.agents = integer(*f, child(p, "agents"));
    if (const Json* f = optional_field(*nw, p, "initial_edge")) o.initial_edge = edge_from_json(*f, child(p, "initial_edge"));
    if (const Json* f = optional_field(*nw, p, "network_file")) o.network_file = text(*f, child(p, "network_file"));
    if (const Json* f = optional_field(*nw, p, "prior")) {
      const std::string mode = text(*f, child(p, "prior"));
      if (mode == "true") {
        o.prior = PriorMode::true_prior;
      } else if (mode == "uniform") {
        o.prior = PriorMode::uniform;
      } else {
        throw SchemaError(child(p, "prior"), "expected \"true\" or \"uniform\"");
      }
    }
  }
  try {
    c.check();
  } catch (const PreconditionError& e) {
    throw SchemaError("", e.what());
  }
  return c;
}

Json error_to_json(const std::exception& error) {
  Json j = header(schema::error);
  j["message"] = error.what();
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    j["kind"] = e->kind();
    if (const auto* s = dynamic_cast<const SchemaError*>(e)) j["path"] = s->path().empty() ? "/" : s->path();
    if (const auto* s = dynamic_cast<const SupportError*>(e)) j["index"] = s->index();
    if (const auto* c = dynamic_cast<const ConvergenceError*>(e)) {
      j["residual"] = c->residual();
      j["iterations"] = c->iterations();
    }
    if (const auto* d = dynamic_cast<const DegenerateSupportError*>(e)) {
      j["time_index"] = d->time_index();
      j["state_index"] = d->state_index();
    }
  } else {
    j["kind"] = "internal";
  }
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON in ") + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path);
  out << contents;
  if (!out) throw PreconditionError("failed writing " + path);
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string grid_csv(const std::vector<Vector>& rows, const std::string& index_name,
                     const std::string& column_prefix, long first_index) {
  std::ostringstream out;
  out << index_name;
  const Eigen::Index cols = rows.empty() ? 0 : rows.front().size();
  for (Eigen::Index k = 0; k < cols; ++k) out << ',' << column_prefix << (k + 1);
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << first_index + static_cast<long>(r);
    for (Eigen::Index k = 0; k < rows[r].size(); ++k) out << ',' << format_number(rows[r][k]);
    out << '\n';
  }
  return out.str();
}

std::string marginals_csv(const std::vector<Marginal>& marginals, int first_time) {
  std::vector<Vector> rows;
  for (const auto& m : marginals) rows.push_back(m.mass());
  return grid_csv(rows, "t", "state_", first_time);
}

std::string trace_csv(const std::vector<double>& trace) {
  std::ostringstream out;
  out << "sweep,dual_objective\n";
  for (std::size_t k = 0; k < trace.size(); ++k) out << k + 1 << ',' << format_number(trace[k]) << '\n';
  return out.str();
}

}  // namespace enflow

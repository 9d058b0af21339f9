#pragma once

#include "enflow/bridge.hpp"
#include "enflow/divergence.hpp"
#include "enflow/experiments.hpp"
#include "enflow/hmm_flow.hpp"
#include "enflow/network.hpp"
#include "enflow/oracle.hpp"
#include "enflow/probe.hpp"
#include "enflow/simulator.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace enflow {

using Json = nlohmann::json;

/// Version written into, and required from, every top-level document.
inline constexpr int kSchemaVersion = 1;

namespace schema {
inline constexpr const char* problem_instance = "enflow.problem_instance";
inline constexpr const char* bridge_problem = "enflow.bridge_problem";
inline constexpr const char* likelihood_problem = "enflow.likelihood_problem";
inline constexpr const char* trajectory = "enflow.trajectory";
inline constexpr const char* flow_estimate = "enflow.flow_estimate";
inline constexpr const char* bridge_solution = "enflow.bridge_solution";
inline constexpr const char* oracle_result = "enflow.oracle_result";
inline constexpr const char* likelihood_report = "enflow.likelihood_report";
inline constexpr const char* network = "enflow.network";
inline constexpr const char* experiment_config = "enflow.experiment_config";
inline constexpr const char* probe_table = "enflow.probe_table";
inline constexpr const char* error = "enflow.error";
}  // namespace schema

/// Endpoints, kernel and horizon of a bridge problem.
struct BridgeProblem {
  Marginal mu0;
  Marginal muT;
  TransitionModel transition;
  int horizon = 1;
};

struct LikelihoodProblem {
  Marginal prior;
  TransitionModel transition;
  Matrix plan;
};

/// {"rows": r, "cols": c, "data": [[row 0], [row 1], ...]}
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& path = "");
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& path = "");

/// Log-domain vectors: -infinity is written as null.
Json log_vector_to_json(const Vector& v);
Vector log_vector_from_json(const Json& j, const std::string& path = "");

/// Throws SchemaError unless j["schema"] == name and j["version"] matches.
void require_schema(const Json& j, const char* name);
/// The "schema" field of a document, or SchemaError.
std::string schema_of(const Json& j);

Json to_json(const ProblemInstance& instance);
/// Structural checks only; model invariants are left to validate_instance.
/// "normalize": true renormalizes kernel rows on load.
ProblemInstance instance_from_json(const Json& j);

Json to_json(const BridgeProblem& problem);
BridgeProblem bridge_problem_from_json(const Json& j);

Json to_json(const LikelihoodProblem& problem);
LikelihoodProblem likelihood_problem_from_json(const Json& j);

Json to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const Json& j);

Json to_json(const DualState& dual);
DualState dual_from_json(const Json& j, const std::string& path = "");

Json to_json(const FlowEstimate& estimate);
Json to_json(const BridgeSolution& solution);
Json to_json(const OracleResult& result);
Json to_json(const LikelihoodReport& report);
Json to_json(const std::vector<ProbeRow>& rows);

Json to_json(const NetworkModel& network);
NetworkModel network_from_json(const Json& j);

Json to_json(const ExperimentConfig& config);
/// Missing fields keep their defaults.
ExperimentConfig config_from_json(const Json& j);

Json error_to_json(const std::exception& error);

std::string to_string(LogDomain mode);
LogDomain log_domain_from_string(const std::string& text);

/// Reads and parses a JSON file; parse failures become SchemaError.
Json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const Json& j);

/// Shortest round-trip text for a double.
std::string format_number(double value);

/// CSV with header `index_name,prefix1,prefix2,...` and one row per vector,
/// indexed from `first_index`.
std::string grid_csv(const std::vector<Vector>& rows, const std::string& index_name,
                     const std::string& column_prefix, long first_index);
std::string marginals_csv(const std::vector<Marginal>& marginals, int first_time = 0);
std::string trace_csv(const std::vector<double>& trace);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace enflow

#include "enflow/errors.hpp"
#include "enflow/serialization.hpp"
#include "random_instances.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace enflow;

namespace {

std::string schema_error_path(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Serialization, InstanceRoundTrip) {
  Rng rng(1);
  const auto inst = fixtures::random_hmm_instance(rng, 3, 2, 3, 2);
  const Json j = to_json(inst);
  EXPECT_EQ(j["schema"], schema::problem_instance);
  EXPECT_EQ(j["version"], kSchemaVersion);
  const auto back = instance_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.prior.mass(), inst.prior.mass());
  EXPECT_EQ(back.transition.kernel(), inst.transition.kernel());
  ASSERT_EQ(back.sensors.size(), 2u);
  EXPECT_EQ(back.sensors[1].kernel(), inst.sensors[1].kernel());
  EXPECT_EQ(back.observations[2][1].counts, inst.observations[2][1].counts);
  EXPECT_EQ(back.observations[2][1].time_index, 3);
  EXPECT_EQ(back.observations[2][1].sensor_index, 1);
}

TEST(Serialization, DoublesSurviveTextRoundTrip) {
  const Vector v = (Vector(3) << 0.1, 1.0 / 3.0, 1e-300).finished();
  EXPECT_EQ(vector_from_json(Json::parse(vector_to_json(v).dump())), v);
}

TEST(Serialization, LogVectorsEncodeMinusInfinityAsNull) {
  const Vector v = (Vector(2) << -std::numeric_limits<double>::infinity(), 1.5).finished();
  const Json j = log_vector_to_json(v);
  EXPECT_TRUE(j[0].is_null());
  EXPECT_EQ(log_vector_from_json(j), v);
}

TEST(Serialization, TrajectoryAndNetworkRoundTrip) {
  const auto net = build_paper_network();
  EXPECT_EQ(to_json(network_from_json(to_json(net))), to_json(net));
  Rng rng(2);
  const auto inst = fixtures::random_hmm_instance(rng, 3, 2, 2, 1);
  const auto traj = simulate(inst.prior, inst.transition, inst.sensors, 3, 5);
  EXPECT_EQ(to_json(trajectory_from_json(to_json(traj))), to_json(traj));
}

TEST(Serialization, BridgeAndLikelihoodProblemsRoundTrip) {
  BridgeProblem p{Marginal(Vector::Ones(2)), Marginal(Vector::Ones(2)),
                  TransitionModel(Matrix::Constant(2, 2, 0.5)), 3};
  const auto q = bridge_problem_from_json(to_json(p));
  EXPECT_EQ(q.horizon, 3);
  EXPECT_EQ(q.transition.kernel(), p.transition.kernel());
  LikelihoodProblem l{Marginal(Vector::Ones(2)), TransitionModel(Matrix::Constant(2, 2, 0.5)), Matrix::Identity(2, 2)};
  EXPECT_EQ(likelihood_problem_from_json(to_json(l)).plan, l.plan);
}

TEST(Serialization, ConfigRoundTripAndDefaults) {
  ExperimentConfig c;
  c.kind = ExperimentKind::network;
  c.seed = 77;
  c.network.prior = PriorMode::uniform;
  c.particle_cloud.model_sigma = 1.5;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  const auto minimal = config_from_json(
      Json{{"schema", schema::experiment_config}, {"version", kSchemaVersion}, {"kind", "particle_cloud"}});
  EXPECT_EQ(to_json(minimal), to_json(ExperimentConfig{}));
}

TEST(Serialization, DualStateRoundTrip) {
  DualState d;
  d.log_u1 = (Vector(2) << 0.5, -std::numeric_limits<double>::infinity()).finished();
  d.log_v = {{(Vector(2) << 1.0, 2.0).finished()}};
  d.log_y = {Vector::Zero(2)};
  d.log_w = {Vector::Ones(2)};
  const auto back = dual_from_json(to_json(d));
  EXPECT_EQ(back.log_u1, d.log_u1);
  EXPECT_EQ(back.log_v[0][0], d.log_v[0][0]);
}

TEST(Serialization, SchemaErrorsNameThePath) {
  Rng rng(3);
  Json j = to_json(fixtures::random_hmm_instance(rng, 2, 2, 2, 1));
  EXPECT_EQ(schema_error_path([&] {
              Json k = j;
              k.erase("prior");
              instance_from_json(k);
            }),
            "/prior");
  EXPECT_EQ(schema_error_path([&] {
              Json k = j;
              k["transition"]["data"][1][0] = "x";
              instance_from_json(k);
            }),
            "/transition/data/1/0");
  EXPECT_EQ(schema_error_path([&] {
              Json k = j;
              k["observations"][1][0][1] = "x";
              instance_from_json(k);
            }),
            "/observations/1/0/1");
  EXPECT_EQ(schema_error_path([&] {
              Json k = j;
              k["schema"] = "enflow.other";
              instance_from_json(k);
            }),
            "/schema");
  EXPECT_EQ(schema_error_path([&] {
              Json k = j;
              k["version"] = 99;
              instance_from_json(k);
            }),
            "/version");
  EXPECT_EQ(schema_error_path([&] {
              config_from_json(Json{{"schema", schema::experiment_config},
                                    {"version", kSchemaVersion},
                                    {"kind", "network"},
                                    {"network", {{"prior", "weird"}}}});
            }),
            "/network/prior");
}

TEST(Serialization, ErrorJsonCarriesKindAndPath) {
  const Json e = error_to_json(SchemaError("/a/b", "bad"));
  EXPECT_EQ(e["schema"], schema::error);
  EXPECT_EQ(e["path"], "/a/b");
  EXPECT_FALSE(e["kind"].get<std::string>().empty());
  const Json plain = error_to_json(std::runtime_error("boom"));
  EXPECT_EQ(plain["message"], "boom");
}

TEST(Serialization, InvalidJsonFileIsASchemaError) {
  const auto path = std::filesystem::temp_directory_path() / "enflow_invalid.json";
  write_text_file(path.string(), "{ not json");
  EXPECT_THROW(read_json_file(path.string()), SchemaError);
  std::filesystem::remove(path);
}

TEST(Serialization, CsvGrids) {
  const std::vector<Marginal> ms{Marginal((Vector(2) << 1, 0.5).finished()), Marginal((Vector(2) << 0.25, 1.25).finished())};
  EXPECT_EQ(marginals_csv(ms), "t,state_1,state_2\n0,1,0.5\n1,0.25,1.25\n");
  EXPECT_EQ(trace_csv({1.5, 2.0}), "sweep,dual_objective\n1,1.5\n2,2\n");
  EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(Serialization, LogDomainNames) {
  for (LogDomain m : {LogDomain::automatic, LogDomain::on, LogDomain::off}) {
    EXPECT_EQ(log_domain_from_string(to_string(m)), m);
  }
  EXPECT_THROW(log_domain_from_string("maybe"), PreconditionError);
}

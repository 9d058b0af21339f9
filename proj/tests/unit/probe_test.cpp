#include "enflow/probe.hpp"

#include <gtest/gtest.h>

using namespace enflow;

TEST(Probe, WorkScalesWithHorizonAndStates) {
  ProbeOptions opts;
  opts.states = {10, 20};
  opts.symbols = {3};
  opts.horizons = {5, 10};
  opts.sweeps = 3;
  opts.warmup = 1;
  const auto rows = sweep_cost_probe(opts);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].states, 10);
  EXPECT_EQ(rows[1].horizon, 10);
  EXPECT_EQ(rows[1].work_per_sweep, 2 * rows[0].work_per_sweep);
  EXPECT_NEAR(static_cast<double>(rows[3].work_per_sweep) / rows[1].work_per_sweep, 3.7, 0.3);
  for (const auto& r : rows) EXPECT_GT(r.seconds_per_sweep, 0.0);
}

TEST(Probe, SingleStateRuns) {
  ProbeOptions opts;
  opts.states = {1};
  opts.symbols = {1};
  opts.horizons = {3};
  opts.sweeps = 2;
  const auto rows = sweep_cost_probe(opts);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].work_per_sweep, 0);
}

TEST(Probe, InstancesAreDeterministicAndConsistent) {
  const auto a = random_probe_instance(6, 3, 4, 9);
  const auto b = random_probe_instance(6, 3, 4, 9);
  EXPECT_EQ(a.transition.kernel(), b.transition.kernel());
  EXPECT_TRUE(validate_instance(a).empty());
  EXPECT_GT(a.transition.kernel().minCoeff(), 0.0);
}

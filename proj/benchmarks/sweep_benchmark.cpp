#include <benchmark/benchmark.h>

#include "enflow/bridge.hpp"
#include "enflow/hmm_flow.hpp"
#include "enflow/probe.hpp"

using namespace enflow;

// One estimator sweep; args are n, m, T.
static void EstimatorSweep(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto m = static_cast<int>(state.range(1));
  const auto horizon = static_cast<int>(state.range(2));
  const auto inst = random_probe_instance(n, m, horizon, 7);
  FlowSweeper sweeper(inst, {});
  for (auto _ : state) {
    sweeper.sweep();
    benchmark::DoNotOptimize(sweeper.dual());
  }
  state.counters["work"] = benchmark::Counter(
      static_cast<double>(sweeper.work()), benchmark::Counter::kAvgIterations);
}
BENCHMARK(EstimatorSweep)
    ->Args({50, 5, 25})
    ->Args({100, 5, 25})
    ->Args({100, 5, 50})
    ->Args({200, 5, 50})
    ->Unit(benchmark::kMicrosecond);

static void EstimatorSweepLogDomain(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto inst = random_probe_instance(n, 5, 25, 7);
  EstimatorOptions opts;
  opts.log_domain = LogDomain::on;
  FlowSweeper sweeper(inst, opts);
  for (auto _ : state) {
    sweeper.sweep();
    benchmark::DoNotOptimize(sweeper.dual());
  }
}
BENCHMARK(EstimatorSweepLogDomain)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

static void SingleStepBridge(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto inst = random_probe_instance(n, 2, 1, 11);
  Vector target = inst.prior.mass().reverse();
  for (auto _ : state) {
    auto sol = solve_single_step(inst.prior, Marginal(target), inst.transition);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(SingleStepBridge)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

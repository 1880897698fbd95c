#include <benchmark/benchmark.h>

#include <random>

#include "tiersim/energy.hpp"
#include "tiersim/sched.hpp"
#include "tiersim/sim.hpp"

using namespace tiersim;

namespace {

PowerTrace make_trace(std::size_t samples) {
  std::mt19937_64 rng(99);
  PowerTrace trace;
  trace.node_id = "n";
  Micros t = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    trace.samples.push_back({t, 1.9 + 3.1 * static_cast<double>(rng() >> 11) * 0x1.0p-53});
    t += 100'000;
  }
  return trace;
}

void BM_IntegrateTrapezoid(benchmark::State& state) {
  const PowerTrace trace = make_trace(static_cast<std::size_t>(state.range(0)));
  const TimeWindow window{trace.samples.front().timestamp, trace.samples.back().timestamp};
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_trapezoid(trace, window));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_IntegrateTrapezoid)->RangeMultiplier(4)->Range(64, 65536)->Complexity();

void BM_PlaceGlobal(benchmark::State& state) {
  std::vector<NodeSpec> nodes;
  for (int i = 0; i < state.range(0); ++i) {
    NodeSpec node;
    node.node_id = "n" + std::to_string(i);
    node.layer = static_cast<Layer>(i % 3);
    node.cores = 4 + (i % 5);
    node.memory_mib = 2048;
    node.power_model = PowerModel{1.0 + 0.1 * (i % 7), 0.5, 8.0};
    node.net_bandwidth_bps = 10'000'000;
    nodes.push_back(node);
  }
  const auto cluster = validate_cluster(nodes);
  const LayerStrategies strategies = {{Layer::Edge, Strategy::Fifo},
                                      {Layer::Fog, Strategy::BestFitCores},
                                      {Layer::Cloud, Strategy::EnergyGreedy}};
  TaskSpec task;
  task.task_id = "t";
  task.parallel_work = 500;
  task.cores_per_node = 2;
  task.max_nodes = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(place_global(task, cluster, strategies, Objective::MinEnergy));
  }
}
BENCHMARK(BM_PlaceGlobal)->Arg(6)->Arg(12)->Arg(24)->Arg(48);

void BM_SimulatedRun(benchmark::State& state) {
  Scenario scenario;
  for (int i = 0; i < 3; ++i) {
    NodeSpec node;
    node.node_id = "rpi" + std::to_string(i + 1);
    node.layer = Layer::Fog;
    node.cores = 4;
    node.memory_mib = 1024;
    node.power_model = PowerModel{1.9, 0.775, 5.0};
    node.net_bandwidth_bps = 12'500'000;
    scenario.nodes.push_back(node);
  }
  scenario.strategies = {{Layer::Fog, Strategy::Fifo}};
  ScenarioTask task;
  task.spec.task_id = "t";
  task.spec.serial_work = 20;
  task.spec.parallel_work = 1140;
  task.spec.per_node_overhead_s = 2.0;
  task.spec.cores_per_node = 4;
  task.spec.memory_demand_mib = 64;
  task.spec.max_nodes = static_cast<int>(state.range(0));
  scenario.tasks.push_back(task);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(scenario));
  }
}
BENCHMARK(BM_SimulatedRun)->Arg(1)->Arg(3);

}  // namespace

BENCHMARK_MAIN();

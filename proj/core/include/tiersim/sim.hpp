#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tiersim/control.hpp"
#include "tiersim/energy.hpp"
#include "tiersim/model.hpp"
#include "tiersim/sched.hpp"
#include "tiersim/telemetry.hpp"

namespace tiersim {

struct ScenarioTask {
  Micros arrival = 0;
  TaskSpec spec;
  Objective objective = Objective::MinRuntime;
};

struct Scenario {
  std::vector<NodeSpec> nodes;
  LayerStrategies strategies;
  std::vector<ScenarioTask> tasks;
  double probe_hz = 10.0;
  std::uint64_t seed = 0;
  double controller_period_s = 1.0;
  ControllerConfig controller;
  // Optional extras: minimum simulated span (lets an empty scenario idle for
  // a while) and uniform probe noise amplitude driven by `seed`.
  double duration_s = 0.0;
  double noise_watts = 0.0;

  void validate() const;  // throws ScenarioInvalid
};

// Scenario files are JSON with top-level keys `nodes`, `strategies`, `tasks`,
// `probe_hz`, `seed`, `controller_period`, `power_models` and the optional
// `duration_s`, `noise_watts`, `controller`. Unknown keys are errors.
Scenario parse_scenario(const std::string& text, const std::string& origin = "");
Scenario load_scenario(const std::filesystem::path& path);

struct MigrationRecord {
  std::string task_id;
  Placement from;
  Placement to;
  Micros start = 0;
  Micros finish = 0;
  double estimated_gain = 0.0;
  double transfer_seconds = 0.0;
};

struct WorkLedger {
  double serial_done = 0.0;
  double parallel_done = 0.0;
};

struct SimulationResult {
  std::vector<LifecycleEvent> event_log;
  std::map<std::string, PowerTrace> traces;
  std::map<std::string, EnergyReport> reports;   // recomputed from traces
  std::map<std::string, double> makespans_s;     // tasks with >= 1 window
  std::map<std::string, TaskRecord> records;
  std::map<std::string, Objective> objectives;
  std::map<std::string, WorkLedger> work;
  std::vector<MigrationRecord> migrations;
  Micros end_time = 0;
};

// T(n) = serial/cores + parallel/(n*cores) + overhead*(n-1), seconds.
double runtime_model_seconds(double serial_work, double parallel_work,
                             double per_node_overhead_s, int node_count, int cores_per_node);
double runtime_model_seconds(const TaskSpec& task, int node_count);

// Probe replacement for simulated runs: samples the node's power model at
// 1/probe_hz intervals over [0, t_end], fencepost included.
PowerTrace synthesize_power(const NodeSpec& node,
                            const std::function<double(Micros)>& busy_cores, Micros t_end,
                            double probe_hz);

// Deterministic discrete-event run: arrivals place through the global
// scheduler, probe ticks sample power and resource metrics, controller ticks
// analyze and migrate, and the energy ledger is recomputed from the sampled
// traces at the end. Identical scenarios produce bit-identical results.
SimulationResult run(const Scenario& scenario);

// Whole-cluster energy over the full simulated span (every node, busy or
// idle), as opposed to the per-task window accounting in `reports`.
double total_cluster_energy(const SimulationResult& result);

// Canonical serializations. `serialize` concatenates every section and is the
// byte-comparison form used by determinism checks.
std::string events_csv(const SimulationResult& result);
std::string traces_csv(const SimulationResult& result);
std::string report_csv(const SimulationResult& result);
std::string serialize(const SimulationResult& result);

}  // namespace tiersim

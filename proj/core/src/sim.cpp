#include "tiersim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>

namespace tiersim {

double runtime_model_seconds(double serial_work, double parallel_work,
                             double per_node_overhead_s, int node_count, int cores_per_node) {
  if (node_count < 1) throw Error(Errc::InvalidSpec, "node_count must be >= 1");
  if (cores_per_node < 1) throw Error(Errc::InvalidSpec, "cores_per_node must be >= 1");
  const double cores = static_cast<double>(cores_per_node);
  const double n = static_cast<double>(node_count);
  return serial_work / cores + parallel_work / (n * cores) + per_node_overhead_s * (n - 1.0);
}

double runtime_model_seconds(const TaskSpec& task, int node_count) {
  return runtime_model_seconds(task.serial_work, task.parallel_work, task.per_node_overhead_s,
                               node_count, task.cores_per_node);
}

PowerTrace synthesize_power(const NodeSpec& node,
                            const std::function<double(Micros)>& busy_cores, Micros t_end,
                            double probe_hz) {
  if (!(probe_hz > 0.0)) throw Error(Errc::InvalidSpec, "probe_hz must be > 0");
  const Micros period = std::max<Micros>(1, seconds_to_micros(1.0 / probe_hz));
  PowerTrace trace;
  trace.node_id = node.node_id;
  Micros t = 0;
  while (true) {
    const double busy = std::clamp(busy_cores(t), 0.0, static_cast<double>(node.cores));
    trace.samples.push_back(PowerSample{t, node.power_model.power(busy)});
    if (t >= t_end) break;
    t += period;
  }
  return trace;
}

namespace {

enum class EventKind { Arrival, TaskFinish, MigrationFinish, ProbeTick, ControllerTick };

struct SimEvent {
  Micros time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::ProbeTick;
  std::size_t task_index = 0;
  int generation = 0;
};

struct LaterEvent {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

// Execution runs overhead, then the serial slice on the primary node, then
// the parallel slice on every node. Boundaries are cumulative-rounded so the
// span equals the rounded closed-form runtime.
struct PhasePlan {
  Micros start = 0;
  Micros serial_start = 0;
  Micros parallel_start = 0;
  Micros finish = 0;
};

struct TaskRuntime {
  TaskSpec spec;
  Objective objective = Objective::MinRuntime;
  Micros arrival = 0;
  Placement placement;
  PhasePlan phases;
  Micros window_start = 0;
  double remaining_serial = 0.0;
  double remaining_parallel = 0.0;
  WorkLedger ledger;
  int generation = 0;
  Micros cooldown_until = 0;
  int migrations = 0;
  // Live only while migrating.
  std::vector<std::string> transfer_nodes;
  double transfer_seconds = 0.0;
  Micros transfer_finish = 0;
};

class Engine {
 public:
  explicit Engine(const Scenario& scenario)
      : scenario_(scenario),
        cluster_(validate_cluster(scenario.nodes)),
        store_(MetricsStore::for_cluster(cluster_)),
        rng_(scenario.seed),
        probe_period_(std::max<Micros>(1, seconds_to_micros(1.0 / scenario.probe_hz))),
        controller_period_(std::max<Micros>(1, seconds_to_micros(scenario.controller_period_s))) {}

  SimulationResult run_to_completion() {
    for (std::size_t i = 0; i < scenario_.tasks.size(); ++i) {
      const ScenarioTask& task = scenario_.tasks[i];
      TaskRuntime runtime;
      runtime.spec = task.spec;
      runtime.objective = task.objective;
      runtime.arrival = task.arrival;
      runtime.remaining_serial = task.spec.serial_work;
      runtime.remaining_parallel = task.spec.parallel_work;
      tasks_.push_back(std::move(runtime));
      records_.emplace(task.spec.task_id, TaskRecord(task.spec));
      push(task.arrival, EventKind::Arrival, i);
    }
    push(0, EventKind::ProbeTick, 0);
    if (!tasks_.empty()) push(controller_period_, EventKind::ControllerTick, 0);

    while (!queue_.empty()) {
      const SimEvent event = queue_.top();
      queue_.pop();
      now_ = event.time;
      switch (event.kind) {
        case EventKind::Arrival: on_arrival(event); break;
        case EventKind::TaskFinish: on_finish(event); break;
        case EventKind::MigrationFinish: on_migration_finish(event); break;
        case EventKind::ProbeTick: on_probe(event); break;
        case EventKind::ControllerTick: on_controller(event); break;
      }
    }
    return assemble();
  }

 private:
  TaskRecord& record(const TaskRuntime& task) { return records_.at(task.spec.task_id); }

  void push(Micros time, EventKind kind, std::size_t task_index, int generation = 0) {
    queue_.push(SimEvent{time, next_seq_++, kind, task_index, generation});
  }

  void emit(LifecycleKind kind, const std::string& task_id, std::vector<std::string> node_ids) {
    store_.append_event(LifecycleEvent{now_, task_id, kind, std::move(node_ids)});
  }

  bool all_terminal() const {
    return std::all_of(tasks_.begin(), tasks_.end(), [this](const TaskRuntime& t) {
      const TaskState s = records_.at(t.spec.task_id).state();
      return s == TaskState::Done || s == TaskState::Failed;
    });
  }

  // --- execution model ---------------------------------------------------

  void start_execution(TaskRuntime& task, Micros t) {
    const int width = static_cast<int>(task.placement.node_ids.size());
    const double cores = static_cast<double>(task.spec.cores_per_node);
    const double overhead = task.spec.per_node_overhead_s * (width - 1);
    const double serial = task.remaining_serial / cores;
    const double parallel = task.remaining_parallel / (width * cores);

    task.phases.start = t;
    task.phases.serial_start = t + seconds_to_micros(overhead);
    task.phases.parallel_start = t + seconds_to_micros(overhead + serial);
    task.phases.finish = t + seconds_to_micros(overhead + serial + parallel);
    task.window_start = t;
    ++task.generation;
    push(task.phases.finish, EventKind::TaskFinish, index_of(task), task.generation);
  }

  // Work consumed by running from the phase plan's start until `t`.
  std::pair<double, double> work_done_until(const TaskRuntime& task, Micros t) const {
    const PhasePlan& p = task.phases;
    const double cores = static_cast<double>(task.spec.cores_per_node);
    const double width = static_cast<double>(task.placement.node_ids.size());
    const Micros serial_elapsed =
        std::clamp(t, p.serial_start, p.parallel_start) - p.serial_start;
    const Micros parallel_elapsed = std::clamp(t, p.parallel_start, p.finish) - p.parallel_start;
    const double serial = std::min(task.remaining_serial,
                                   micros_to_seconds(serial_elapsed) * cores);
    const double parallel = std::min(task.remaining_parallel,
                                     micros_to_seconds(parallel_elapsed) * width * cores);
    return {serial, parallel};
  }

  // Called exactly once per phase plan, at interruption or completion; the
  // deltas telescope so total consumed work matches the task's declared work.
  void consume_work(TaskRuntime& task, Micros t) {
    const auto [serial, parallel] = work_done_until(task, t);
    task.remaining_serial -= serial;
    task.remaining_parallel -= parallel;
    task.ledger.serial_done += serial;
    task.ledger.parallel_done += parallel;
  }

  std::size_t index_of(const TaskRuntime& task) const {
    return static_cast<std::size_t>(&task - tasks_.data());
  }

  double busy_cores(const std::string& node_id, Micros t) const {
    double busy = 0.0;
    for (const TaskRuntime& task : tasks_) {
      const TaskState state = records_.at(task.spec.task_id).state();
      if (state == TaskState::Running) {
        const PhasePlan& p = task.phases;
        const bool member = std::binary_search(task.placement.node_ids.begin(),
                                               task.placement.node_ids.end(), node_id);
        if (!member) continue;
        const bool in_overhead = t >= p.start && t < p.serial_start;
        const bool in_serial = t >= p.serial_start && t < p.parallel_start &&
                               node_id == task.placement.node_ids.front();
        const bool in_parallel = t >= p.parallel_start && t < p.finish;
        if (in_overhead || in_serial || in_parallel)
          busy += static_cast<double>(task.spec.cores_per_node);
      } else if (state == TaskState::Migrating) {
        if (t >= task.transfer_finish) continue;
        if (std::find(task.transfer_nodes.begin(), task.transfer_nodes.end(), node_id) !=
            task.transfer_nodes.end())
          busy += 1.0;
      }
    }
    return busy;
  }

  // --- event handlers ----------------------------------------------------

  void on_arrival(const SimEvent& event) {
    TaskRuntime& task = tasks_[event.task_index];
    try {
      task.placement = place_global(task.spec, cluster_, scenario_.strategies, task.objective);
    } catch (const Error& e) {
      if (e.code() != Errc::NoCapacity) throw;
      record(task).set_state(TaskState::Failed);
      emit(LifecycleKind::Failed, task.spec.task_id, {});
      return;
    }
    cluster_.allocate(task.spec, task.placement.node_ids);
    record(task).set_state(TaskState::Running);
    start_execution(task, now_);
    emit(LifecycleKind::Placed, task.spec.task_id, task.placement.node_ids);
    emit(LifecycleKind::Started, task.spec.task_id, task.placement.node_ids);
  }

  void on_finish(const SimEvent& event) {
    TaskRuntime& task = tasks_[event.task_index];
    if (event.generation != task.generation ||
        record(task).state() != TaskState::Running)
      return;  // superseded by a migration

    consume_work(task, task.phases.finish);
    // Flush rounding residue so completed work telescopes exactly.
    task.ledger.serial_done += task.remaining_serial;
    task.ledger.parallel_done += task.remaining_parallel;
    task.remaining_serial = 0.0;
    task.remaining_parallel = 0.0;

    for (const std::string& node_id : task.placement.node_ids)
      record(task).add_window(ExecutionWindow{node_id, task.window_start, now_});
    cluster_.release(task.spec, task.placement.node_ids);
    record(task).set_state(TaskState::Done);
    emit(LifecycleKind::Finished, task.spec.task_id, task.placement.node_ids);
  }

  void apply_plan(TaskRuntime& task, const MigrationPlan& plan) {
    consume_work(task, now_);
    for (const std::string& node_id : task.placement.node_ids)
      record(task).add_window(ExecutionWindow{node_id, task.window_start, now_});

    cluster_.release(task.spec, task.placement.node_ids);
    cluster_.allocate(task.spec, plan.to.node_ids);

    task.transfer_seconds = plan.transfer_seconds;
    task.transfer_finish = now_ + seconds_to_micros(plan.transfer_seconds);
    task.transfer_nodes = {plan.from.node_ids.front()};
    if (plan.to.node_ids.front() != plan.from.node_ids.front())
      task.transfer_nodes.push_back(plan.to.node_ids.front());

    // The transfer occupies one core on each endpoint; both show up in the
    // task's energy ledger.
    if (task.transfer_finish > now_) {
      for (const std::string& node_id : task.transfer_nodes)
        record(task).add_window(ExecutionWindow{node_id, now_, task.transfer_finish});
    }

    task.placement = plan.to;
    ++task.generation;
    ++task.migrations;
    record(task).set_state(TaskState::Migrating);
    emit(LifecycleKind::MigrationStarted, task.spec.task_id, plan.to.node_ids);
    push(task.transfer_finish, EventKind::MigrationFinish, index_of(task), task.generation);
    migrations_.push_back(MigrationRecord{task.spec.task_id, plan.from, plan.to, now_,
                                          task.transfer_finish, plan.estimated_gain,
                                          plan.transfer_seconds});
  }

  void on_migration_finish(const SimEvent& event) {
    TaskRuntime& task = tasks_[event.task_index];
    if (event.generation != task.generation ||
        record(task).state() != TaskState::Migrating)
      return;
    record(task).set_state(TaskState::Running);
    task.cooldown_until =
        now_ + seconds_to_micros(scenario_.controller.cooldown_factor * task.transfer_seconds);
    task.transfer_nodes.clear();
    start_execution(task, now_);
    emit(LifecycleKind::MigrationFinished, task.spec.task_id, task.placement.node_ids);
  }

  void on_probe(const SimEvent&) {
    for (const auto& [node_id, spec] : cluster_.nodes()) {
      const double busy =
          std::clamp(busy_cores(node_id, now_), 0.0, static_cast<double>(spec.cores));
      double watts = spec.power_model.power(busy);
      if (scenario_.noise_watts > 0.0) {
        const double uniform =
            static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
        watts = std::max(0.0, watts + scenario_.noise_watts * (2.0 * uniform - 1.0));
      }
      store_.append_sample(node_id, PowerSample{now_, watts});

      ResourceMetrics metrics;
      metrics.timestamp = now_;
      metrics.cpu_busy_cores = busy;
      metrics.memory_used_mib =
          static_cast<double>(cluster_.allocation(node_id).used_memory_mib);
      for (const TaskRuntime& task : tasks_) {
        if (records_.at(task.spec.task_id).state() != TaskState::Migrating) continue;
        if (now_ >= task.transfer_finish || task.transfer_seconds <= 0.0) continue;
        if (std::find(task.transfer_nodes.begin(), task.transfer_nodes.end(), node_id) ==
            task.transfer_nodes.end())
          continue;
        metrics.net_bytes_per_sec +=
            static_cast<double>(task.spec.state_size_bytes) / task.transfer_seconds;
      }
      store_.append_metrics(node_id, metrics);
    }
    end_time_ = now_;

    const Micros horizon = std::max(seconds_to_micros(scenario_.duration_s), latest_window_end());
    if (!(all_terminal() && now_ >= horizon)) push(now_ + probe_period_, EventKind::ProbeTick, 0);
  }

  Micros latest_window_end() const {
    Micros latest = 0;
    for (const auto& [task_id, rec] : records_)
      for (const ExecutionWindow& w : rec.windows()) latest = std::max(latest, w.end);
    return latest;
  }

  RunningTaskView view_of(const TaskRuntime& task) const {
    RunningTaskView view;
    view.spec = task.spec;
    view.placement = task.placement;
    view.objective = task.objective;
    view.state = records_.at(task.spec.task_id).state();
    view.arrival = task.arrival;
    view.remaining_serial = task.remaining_serial;
    view.remaining_parallel = task.remaining_parallel;
    if (view.state == TaskState::Running) {
      // Migrating tasks already had their in-flight work consumed; their
      // phase plan is stale until execution restarts.
      const auto [serial, parallel] = work_done_until(task, now_);
      view.remaining_serial -= serial;
      view.remaining_parallel -= parallel;
    }
    view.cooldown_until = task.cooldown_until;
    return view;
  }

  void on_controller(const SimEvent&) {
    if (all_terminal()) return;

    MetricsSnapshot snapshot;
    for (const std::string& node_id : store_.node_ids())
      snapshot.emplace(node_id, store_.metrics_tail(
                                    node_id, static_cast<std::size_t>(
                                                 scenario_.controller.dwell_samples)));

    std::vector<RunningTaskView> views;
    std::vector<std::size_t> view_index;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const TaskState state = records_.at(tasks_[i].spec.task_id).state();
      if (state != TaskState::Running && state != TaskState::Migrating) continue;
      views.push_back(view_of(tasks_[i]));
      view_index.push_back(i);
    }

    const std::vector<Trigger> triggers = analyze(snapshot, cluster_, views,
                                                  scenario_.strategies, scenario_.controller,
                                                  now_);
    if (triggers.empty()) {
      push(now_ + controller_period_, EventKind::ControllerTick, 0);
      return;
    }

    // One migration attempt per task per cycle, tasks in id order; each
    // applied plan updates the cluster the next attempt sees.
    std::vector<std::size_t> order(view_index);
    std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
      return tasks_[a].spec.task_id < tasks_[b].spec.task_id;
    });
    for (std::size_t i : order) {
      TaskRuntime& task = tasks_[i];
      if (records_.at(task.spec.task_id).state() != TaskState::Running) continue;
      const Trigger* related = nullptr;
      for (const Trigger& trigger : triggers) {
        const bool matches_task = trigger.task_id && *trigger.task_id == task.spec.task_id;
        const bool matches_node =
            trigger.node_id && std::binary_search(task.placement.node_ids.begin(),
                                                  task.placement.node_ids.end(), *trigger.node_id);
        if ((trigger.kind == TriggerKind::NodeOverloaded && matches_node) ||
            trigger.kind == TriggerKind::NodeIdle ||
            ((trigger.kind == TriggerKind::DeadlineAtRisk ||
              trigger.kind == TriggerKind::BetterPlacementAvailable) &&
             matches_task)) {
          related = &trigger;
          break;
        }
      }
      if (!related) continue;
      const auto plan = plan_migration(*related, view_of(task), cluster_, scenario_.strategies,
                                       scenario_.controller, now_);
      if (plan) apply_plan(task, *plan);
    }

    push(now_ + controller_period_, EventKind::ControllerTick, 0);
  }

  // --- result ------------------------------------------------------------

  SimulationResult assemble() {
    SimulationResult result;
    result.event_log = store_.events();
    result.traces = store_.all_traces();
    result.end_time = end_time_;
    result.migrations = migrations_;

    const Micros max_gap = std::max(kDefaultMaxGapUs, 2 * probe_period_);
    for (const TaskRuntime& task : tasks_) {
      const TaskRecord& rec = records_.at(task.spec.task_id);
      result.records.emplace(task.spec.task_id, rec);
      result.objectives.emplace(task.spec.task_id, task.objective);
      result.work.emplace(task.spec.task_id, task.ledger);
      result.reports.emplace(task.spec.task_id, task_energy(rec, result.traces, max_gap));
      if (!rec.windows().empty())
        result.makespans_s.emplace(task.spec.task_id, makespan_seconds({rec}));

      if (rec.state() == TaskState::Done) {
        const double expected = task.spec.serial_work + task.spec.parallel_work;
        const double done = task.ledger.serial_done + task.ledger.parallel_done;
        if (std::abs(done - expected) > 1e-6 * std::max(1.0, expected))
          throw std::logic_error("work conservation violated for " + task.spec.task_id);
      }
    }
    for (const auto& [task_id, report] : result.reports) {
      double sum = 0.0;
      for (const auto& [node_id, joules] : report.per_node_joules) sum += joules;
      if (sum != report.total_joules)
        throw std::logic_error("energy ledger inconsistent for " + task_id);
    }
    return result;
  }

  const Scenario& scenario_;
  ClusterState cluster_;
  MetricsStore store_;
  std::mt19937_64 rng_;
  Micros probe_period_;
  Micros controller_period_;

  std::vector<TaskRuntime> tasks_;
  std::map<std::string, TaskRecord> records_;
  std::vector<MigrationRecord> migrations_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, LaterEvent> queue_;
  std::uint64_t next_seq_ = 0;
  Micros now_ = 0;
  Micros end_time_ = 0;
};

}  // namespace

SimulationResult run(const Scenario& scenario) {
  scenario.validate();
  Engine engine(scenario);
  return engine.run_to_completion();
}

double total_cluster_energy(const SimulationResult& result) {
  double joules = 0.0;
  for (const auto& [node_id, trace] : result.traces) {
    if (trace.samples.size() < 2) continue;
    const TimeWindow span{trace.samples.front().timestamp, trace.samples.back().timestamp};
    joules += integrate_trapezoid(trace, span, std::numeric_limits<Micros>::max());
  }
  return joules;
}

}  // namespace tiersim

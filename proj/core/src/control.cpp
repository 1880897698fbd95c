#include "tiersim/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tiersim/sim.hpp"

namespace tiersim {

const char* trigger_kind_name(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::NodeOverloaded: return "node_overloaded";
    case TriggerKind::NodeIdle: return "node_idle";
    case TriggerKind::DeadlineAtRisk: return "deadline_at_risk";
    case TriggerKind::BetterPlacementAvailable: return "better_placement_available";
  }
  return "?";
}

int security_deficit(const Placement& placement, const ClusterState& cluster) {
  int deficit = 0;
  for (const std::string& id : placement.node_ids)
    deficit += SecuritySet::kMaxTags - cluster.node(id).security.count();
  return deficit;
}

namespace {

double energy_score(const Placement& placement, const TaskSpec& task, const ClusterState& cluster,
                    double runtime_s) {
  double watts = 0.0;
  for (const std::string& id : placement.node_ids) {
    const NodeSpec& node = cluster.node(id);
    const int busy = cluster.allocation(id).used_cores + task.cores_per_node;
    watts += node.power_model.power(busy);
  }
  return runtime_s * watts;
}

}  // namespace

double estimate_objective(const Placement& placement, const TaskSpec& task,
                          const ClusterState& cluster, Objective objective) {
  if (!placement_valid(task, cluster, placement))
    throw Error(Errc::InfeasiblePlacement, task.task_id);

  const int width = static_cast<int>(placement.node_ids.size());
  const double runtime_s = runtime_model_seconds(task, width);
  if (task.deadline_s && runtime_s > *task.deadline_s)
    throw Error(Errc::InfeasiblePlacement,
                task.task_id + ": predicted runtime exceeds deadline");

  switch (objective) {
    case Objective::MinRuntime:
      return runtime_s;
    case Objective::MinEnergy:
      return energy_score(placement, task, cluster, runtime_s);
    case Objective::MaxSecurity:
      return static_cast<double>(security_deficit(placement, cluster)) * kSecurityScoreScale +
             energy_score(placement, task, cluster, runtime_s);
  }
  throw Error(Errc::InvalidSpec, "unknown objective");
}

TaskSpec remaining_spec(const RunningTaskView& task, Micros now) {
  TaskSpec spec = task.spec;
  spec.serial_work = task.remaining_serial;
  spec.parallel_work = task.remaining_parallel;
  if (spec.deadline_s) {
    const Micros absolute = task.arrival + seconds_to_micros(*task.spec.deadline_s);
    spec.deadline_s = micros_to_seconds(absolute - now);
  }
  return spec;
}

double transfer_time_seconds(const TaskSpec& task, const Placement& from, const Placement& to,
                             const ClusterState& cluster) {
  if (task.state_size_bytes == 0) return 0.0;
  std::int64_t min_bw = std::numeric_limits<std::int64_t>::max();
  for (const Placement* p : {&from, &to})
    for (const std::string& id : p->node_ids)
      min_bw = std::min(min_bw, cluster.node(id).net_bandwidth_bps);
  return static_cast<double>(task.state_size_bytes) / static_cast<double>(min_bw);
}

namespace {

// Score of the task's current placement and the best alternative, both
// evaluated on the cluster with the task's own reservation removed. Returns
// nothing when no alternative exists.
struct Reassessment {
  double current_score = 0.0;
  bool current_feasible = false;
  Placement candidate;
  double candidate_score = 0.0;
};

std::optional<Reassessment> reassess(const RunningTaskView& task, const ClusterState& cluster,
                                     const LayerStrategies& strategies, Micros now) {
  ClusterState without = cluster;
  without.release(task.spec, task.placement.node_ids);
  const TaskSpec rem = remaining_spec(task, now);
  // The running placement already paid its distribution overhead; only
  // candidates charge it again. Without this, shrinking remaining work makes
  // narrow candidates look better and the controller flaps near completion.
  TaskSpec rem_in_place = rem;
  rem_in_place.per_node_overhead_s = 0.0;

  Reassessment out;
  try {
    out.candidate = place_global(rem, without, strategies, task.objective);
    out.candidate_score = estimate_objective(out.candidate, rem, without, task.objective);
  } catch (const Error& e) {
    if (e.code() == Errc::NoCapacity) return std::nullopt;
    throw;
  }
  try {
    out.current_score = estimate_objective(task.placement, rem_in_place, without, task.objective);
    out.current_feasible = true;
  } catch (const Error& e) {
    if (e.code() != Errc::InfeasiblePlacement) throw;
    out.current_feasible = false;  // e.g. remaining deadline unreachable where it sits
  }
  return out;
}

double relative_gain(const Reassessment& r, double candidate_cost) {
  if (!r.current_feasible) return 1.0;
  if (!(r.current_score > 0.0)) return 0.0;
  return (r.current_score - candidate_cost) / r.current_score;
}

}  // namespace

std::vector<Trigger> analyze(const MetricsSnapshot& snapshot, const ClusterState& cluster,
                             const std::vector<RunningTaskView>& tasks,
                             const LayerStrategies& strategies, const ControllerConfig& config,
                             Micros now) {
  std::vector<Trigger> triggers;

  const bool any_running = std::any_of(tasks.begin(), tasks.end(), [](const RunningTaskView& t) {
    return t.state == TaskState::Running;
  });

  auto dwell_beyond = [&](const std::vector<ResourceMetrics>& samples, auto pred) {
    if (static_cast<int>(samples.size()) < config.dwell_samples) return false;
    return std::all_of(samples.end() - config.dwell_samples, samples.end(), pred);
  };

  for (const auto& [node_id, spec] : cluster.nodes()) {
    auto it = snapshot.find(node_id);
    if (it == snapshot.end()) continue;
    const double cores = static_cast<double>(spec.cores);
    if (dwell_beyond(it->second, [&](const ResourceMetrics& m) {
          return m.cpu_busy_cores / cores > config.overload_utilization;
        })) {
      triggers.push_back(Trigger{TriggerKind::NodeOverloaded, now, std::nullopt, node_id});
    } else if (any_running && dwell_beyond(it->second, [&](const ResourceMetrics& m) {
                 return m.cpu_busy_cores / cores < config.idle_utilization;
               })) {
      triggers.push_back(Trigger{TriggerKind::NodeIdle, now, std::nullopt, node_id});
    }
  }

  std::vector<const RunningTaskView*> running;
  for (const RunningTaskView& t : tasks)
    if (t.state == TaskState::Running) running.push_back(&t);
  std::sort(running.begin(), running.end(), [](const RunningTaskView* a, const RunningTaskView* b) {
    return a->spec.task_id < b->spec.task_id;
  });

  for (const RunningTaskView* task : running) {
    if (task->spec.deadline_s) {
      TaskSpec rem = remaining_spec(*task, now);
      rem.per_node_overhead_s = 0.0;  // already paid by the running placement
      const double remaining_runtime =
          runtime_model_seconds(rem, static_cast<int>(task->placement.node_ids.size()));
      const Micros predicted_completion = now + seconds_to_micros(remaining_runtime);
      const Micros deadline = task->arrival + seconds_to_micros(*task->spec.deadline_s);
      if (predicted_completion > deadline)
        triggers.push_back(
            Trigger{TriggerKind::DeadlineAtRisk, now, task->spec.task_id, std::nullopt});
    }

    const auto r = reassess(*task, cluster, strategies, now);
    if (r && r->candidate.node_ids != task->placement.node_ids &&
        relative_gain(*r, r->candidate_score) >= config.hysteresis) {
      triggers.push_back(
          Trigger{TriggerKind::BetterPlacementAvailable, now, task->spec.task_id, std::nullopt});
    }
  }

  return triggers;
}

std::optional<MigrationPlan> plan_migration(const Trigger& trigger, const RunningTaskView& task,
                                            const ClusterState& cluster,
                                            const LayerStrategies& strategies,
                                            const ControllerConfig& config, Micros now) {
  (void)trigger;  // the trigger motivates the call; the plan re-derives everything
  if (task.state != TaskState::Running)
    throw Error(Errc::TaskNotRunning, task.spec.task_id);
  if (now < task.cooldown_until) return std::nullopt;

  const auto r = reassess(task, cluster, strategies, now);
  if (!r) return std::nullopt;
  if (r->candidate.node_ids == task.placement.node_ids) return std::nullopt;

  const double transfer_s =
      transfer_time_seconds(task.spec, task.placement, r->candidate, cluster);

  // Fold the migration cost into the candidate score so the hysteresis test
  // covers it: seconds for runtime, predicted transfer energy otherwise.
  double cost = r->candidate_score;
  if (task.objective == Objective::MinRuntime) {
    cost += transfer_s;
  } else if (transfer_s > 0.0) {
    std::set<std::string> endpoints = {task.placement.node_ids.front(),
                                       r->candidate.node_ids.front()};
    double transfer_watts = 0.0;
    for (const std::string& id : endpoints)
      transfer_watts += cluster.node(id).power_model.power(1.0);
    cost += transfer_s * transfer_watts;
  }

  const TaskSpec rem = remaining_spec(task, now);
  if (rem.deadline_s) {
    const double candidate_runtime =
        runtime_model_seconds(rem, static_cast<int>(r->candidate.node_ids.size()));
    if (transfer_s + candidate_runtime > *rem.deadline_s) return std::nullopt;
  }

  const double gain = relative_gain(*r, cost);
  if (gain < config.hysteresis) return std::nullopt;

  return MigrationPlan{task.spec.task_id, task.placement, r->candidate, gain, transfer_s};
}

}  // namespace tiersim

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tiersim/model.hpp"
#include "tiersim/sched.hpp"
#include "tiersim/telemetry.hpp"

namespace tiersim {

struct ControllerConfig {
  // Minimum relative score improvement before a migration is proposed.
  double hysteresis = 0.10;
  // Utilization bounds for overload/idle triggers; both need `dwell_samples`
  // consecutive probe samples beyond the bound.
  double overload_utilization = 0.90;
  double idle_utilization = 0.10;
  int dwell_samples = 3;
  // Per-task cooldown between migrations, as a multiple of transfer time.
  double cooldown_factor = 2.0;
};

enum class TriggerKind {
  NodeOverloaded,
  NodeIdle,
  DeadlineAtRisk,
  BetterPlacementAvailable,
};

const char* trigger_kind_name(TriggerKind kind);

struct Trigger {
  TriggerKind kind = TriggerKind::NodeOverloaded;
  Micros timestamp = 0;
  std::optional<std::string> task_id;  // set for DeadlineAtRisk / BetterPlacementAvailable
  std::optional<std::string> node_id;  // set for NodeOverloaded / NodeIdle
};

struct MigrationPlan {
  std::string task_id;
  Placement from;
  Placement to;
  double estimated_gain = 0.0;  // relative score improvement, >= hysteresis
  double transfer_seconds = 0.0;
};

// Controller-side view of one task that has been placed.
struct RunningTaskView {
  TaskSpec spec;
  Placement placement;
  Objective objective = Objective::MinRuntime;
  TaskState state = TaskState::Running;
  Micros arrival = 0;
  double remaining_serial = 0.0;    // core-seconds
  double remaining_parallel = 0.0;  // core-seconds
  Micros cooldown_until = 0;
};

// Most recent probe samples per node, oldest first.
using MetricsSnapshot = std::map<std::string, std::vector<ResourceMetrics>>;

// Lexicographic (security deficit, energy) scores are packed into one double;
// the deficit part is scaled far above any realistic energy score.
inline constexpr double kSecurityScoreScale = 1e12;

// Missing capability tags summed over the placement's nodes. Lower is better.
int security_deficit(const Placement& placement, const ClusterState& cluster);

// Objective score for a feasible placement; lower is better.
//   MinRuntime   predicted makespan T(n) in seconds
//   MinEnergy    sum over chosen nodes of busy power x T(n), in joules
//                (constant-power prediction; the ledger measures traces)
//   MaxSecurity  security deficit, then the energy score, lexicographic
// Throws InfeasiblePlacement for infeasible placements and for placements
// whose predicted runtime exceeds the task's deadline.
double estimate_objective(const Placement& placement, const TaskSpec& task,
                          const ClusterState& cluster, Objective objective);

// Task spec reduced to the work still outstanding, with the deadline budget
// rebased to `now`. Used to re-score candidate placements mid-flight.
TaskSpec remaining_spec(const RunningTaskView& task, Micros now);

// Stop-and-copy transfer time: state size over the slowest uplink among the
// nodes involved on either side.
double transfer_time_seconds(const TaskSpec& task, const Placement& from,
                             const Placement& to, const ClusterState& cluster);

// Metrics analyzer: evaluates the four trigger predicates against the latest
// snapshot. Deterministic order: node triggers by node id, task triggers by
// task id.
std::vector<Trigger> analyze(const MetricsSnapshot& snapshot, const ClusterState& cluster,
                             const std::vector<RunningTaskView>& tasks,
                             const LayerStrategies& strategies, const ControllerConfig& config,
                             Micros now);

// Migration manager: re-runs global placement with the task's own resources
// excluded and returns a plan only when the relative gain, net of transfer
// cost, clears the hysteresis threshold and the cooldown has expired. The
// current placement is scored with its distribution overhead sunk; candidates
// pay overhead and transfer in full.
// Throws TaskNotRunning if the task is not currently Running.
std::optional<MigrationPlan> plan_migration(const Trigger& trigger, const RunningTaskView& task,
                                            const ClusterState& cluster,
                                            const LayerStrategies& strategies,
                                            const ControllerConfig& config, Micros now);

}  // namespace tiersim

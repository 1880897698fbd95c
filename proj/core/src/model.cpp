#include "tiersim/model.hpp"

#include <algorithm>
#include <cmath>

namespace tiersim {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyCluster: return "EmptyCluster";
    case Errc::DuplicateNodeId: return "DuplicateNodeId";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidTransition: return "InvalidTransition";
    case Errc::WindowNotCovered: return "WindowNotCovered";
    case Errc::MissingTrace: return "MissingTrace";
    case Errc::NoWindows: return "NoWindows";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::NoCapacity: return "NoCapacity";
    case Errc::InfeasiblePlacement: return "InfeasiblePlacement";
    case Errc::TaskNotRunning: return "TaskNotRunning";
    case Errc::ScenarioInvalid: return "ScenarioInvalid";
  }
  return "UnknownError";
}

Micros seconds_to_micros(double seconds) {
  return static_cast<Micros>(std::llround(seconds * static_cast<double>(kMicrosPerSecond)));
}

double micros_to_seconds(Micros us) {
  return static_cast<double>(us) / static_cast<double>(kMicrosPerSecond);
}

const char* layer_name(Layer layer) {
  switch (layer) {
    case Layer::Edge: return "edge";
    case Layer::Fog: return "fog";
    case Layer::Cloud: return "cloud";
  }
  return "?";
}

std::optional<Layer> layer_from_name(std::string_view name) {
  if (name == "edge") return Layer::Edge;
  if (name == "fog") return Layer::Fog;
  if (name == "cloud") return Layer::Cloud;
  return std::nullopt;
}

const char* security_tag_name(SecurityTag tag) {
  switch (tag) {
    case SecurityTag::Sgx: return "sgx";
    case SecurityTag::TrustZone: return "trustzone";
  }
  return "?";
}

std::optional<SecurityTag> security_tag_from_name(std::string_view name) {
  if (name == "sgx") return SecurityTag::Sgx;
  if (name == "trustzone") return SecurityTag::TrustZone;
  return std::nullopt;
}

std::vector<SecurityTag> SecuritySet::tags() const {
  std::vector<SecurityTag> out;
  if (contains(SecurityTag::Sgx)) out.push_back(SecurityTag::Sgx);
  if (contains(SecurityTag::TrustZone)) out.push_back(SecurityTag::TrustZone);
  return out;
}

double PowerModel::power(double busy_cores) const {
  return std::min(idle_watts + per_core_watts * busy_cores, cap_watts);
}

void PowerModel::validate() const {
  if (!(idle_watts >= 0.0) || !std::isfinite(idle_watts))
    throw Error(Errc::InvalidSpec, "idle_watts must be finite and >= 0");
  if (!(per_core_watts >= 0.0) || !std::isfinite(per_core_watts))
    throw Error(Errc::InvalidSpec, "per_core_watts must be finite and >= 0");
  if (!(cap_watts >= idle_watts) || !std::isfinite(cap_watts))
    throw Error(Errc::InvalidSpec, "cap_watts must be finite and >= idle_watts");
}

namespace {

bool valid_identifier(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

void NodeSpec::validate() const {
  if (!valid_identifier(node_id))
    throw Error(Errc::InvalidSpec, "node_id must be a non-empty [A-Za-z0-9_.-]+ identifier");
  if (cores < 1) throw Error(Errc::InvalidSpec, node_id + ": cores must be >= 1");
  if (memory_mib < 1) throw Error(Errc::InvalidSpec, node_id + ": memory_mib must be >= 1");
  if (net_bandwidth_bps <= 0)
    throw Error(Errc::InvalidSpec, node_id + ": net_bandwidth_bps must be > 0");
  power_model.validate();
}

void TaskSpec::validate() const {
  if (!valid_identifier(task_id))
    throw Error(Errc::InvalidSpec, "task_id must be a non-empty [A-Za-z0-9_.-]+ identifier");
  if (!(serial_work >= 0.0) || !std::isfinite(serial_work))
    throw Error(Errc::InvalidSpec, task_id + ": serial_work must be finite and >= 0");
  if (!(parallel_work >= 0.0) || !std::isfinite(parallel_work))
    throw Error(Errc::InvalidSpec, task_id + ": parallel_work must be finite and >= 0");
  if (!(serial_work + parallel_work > 0.0))
    throw Error(Errc::InvalidSpec, task_id + ": serial_work + parallel_work must be > 0");
  if (!(per_node_overhead_s >= 0.0) || !std::isfinite(per_node_overhead_s))
    throw Error(Errc::InvalidSpec, task_id + ": per_node_overhead_s must be finite and >= 0");
  if (memory_demand_mib < 0)
    throw Error(Errc::InvalidSpec, task_id + ": memory_demand_mib must be >= 0");
  if (cores_per_node < 1)
    throw Error(Errc::InvalidSpec, task_id + ": cores_per_node must be >= 1");
  if (max_nodes < 1) throw Error(Errc::InvalidSpec, task_id + ": max_nodes must be >= 1");
  if (state_size_bytes < 0)
    throw Error(Errc::InvalidSpec, task_id + ": state_size_bytes must be >= 0");
  if (deadline_s && (!(*deadline_s > 0.0) || !std::isfinite(*deadline_s)))
    throw Error(Errc::InvalidSpec, task_id + ": deadline_s must be finite and > 0");
}

const char* task_state_name(TaskState state) {
  switch (state) {
    case TaskState::Pending: return "pending";
    case TaskState::Running: return "running";
    case TaskState::Migrating: return "migrating";
    case TaskState::Done: return "done";
    case TaskState::Failed: return "failed";
  }
  return "?";
}

bool transition_allowed(TaskState from, TaskState to) {
  switch (from) {
    case TaskState::Pending:
      return to == TaskState::Running || to == TaskState::Failed;
    case TaskState::Running:
      return to == TaskState::Migrating || to == TaskState::Done || to == TaskState::Failed;
    case TaskState::Migrating:
      return to == TaskState::Running || to == TaskState::Failed;
    case TaskState::Done:
    case TaskState::Failed:
      return false;
  }
  return false;
}

void TaskRecord::add_window(const ExecutionWindow& window) {
  if (window.end < window.start)
    throw Error(Errc::InvalidSpec, spec_.task_id + ": window end before start");
  for (const ExecutionWindow& existing : windows_) {
    if (existing.node_id != window.node_id) continue;
    if (existing.start < window.end && window.start < existing.end)
      throw Error(Errc::InvalidSpec,
                  spec_.task_id + ": overlapping windows on node " + window.node_id);
  }
  windows_.push_back(window);
}

void TaskRecord::set_state(TaskState next) {
  if (!transition_allowed(state_, next))
    throw Error(Errc::InvalidTransition, spec_.task_id + ": " +
                                             std::string(task_state_name(state_)) + " -> " +
                                             task_state_name(next));
  state_ = next;
}

const NodeSpec& ClusterState::node(const std::string& node_id) const {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) throw Error(Errc::UnknownNode, node_id);
  return it->second;
}

const NodeAllocation& ClusterState::allocation(const std::string& node_id) const {
  auto it = alloc_.find(node_id);
  if (it == alloc_.end()) throw Error(Errc::UnknownNode, node_id);
  return it->second;
}

int ClusterState::free_cores(const std::string& node_id) const {
  return node(node_id).cores - allocation(node_id).used_cores;
}

std::int64_t ClusterState::free_memory_mib(const std::string& node_id) const {
  return node(node_id).memory_mib - allocation(node_id).used_memory_mib;
}

bool ClusterState::node_busy(const std::string& node_id) const {
  return allocation(node_id).used_cores > 0;
}

std::vector<std::string> ClusterState::nodes_in_layer(Layer layer) const {
  std::vector<std::string> out;
  for (const auto& [id, spec] : nodes_)
    if (spec.layer == layer) out.push_back(id);
  return out;
}

void ClusterState::allocate(const TaskSpec& task, const std::vector<std::string>& node_ids) {
  for (const std::string& id : node_ids) {
    if (free_cores(id) < task.cores_per_node || free_memory_mib(id) < task.memory_demand_mib)
      throw Error(Errc::NoCapacity, "allocating " + task.task_id + " on " + id);
  }
  for (const std::string& id : node_ids) {
    NodeAllocation& a = alloc_.at(id);
    a.used_cores += task.cores_per_node;
    a.used_memory_mib += task.memory_demand_mib;
    a.tasks.insert(task.task_id);
  }
}

void ClusterState::release(const TaskSpec& task, const std::vector<std::string>& node_ids) {
  for (const std::string& id : node_ids) {
    NodeAllocation& a = alloc_.at(id);
    if (a.tasks.erase(task.task_id) == 0)
      throw Error(Errc::InvalidSpec, task.task_id + " not allocated on " + id);
    a.used_cores -= task.cores_per_node;
    a.used_memory_mib -= task.memory_demand_mib;
  }
}

ClusterState validate_cluster(const std::vector<NodeSpec>& nodes) {
  if (nodes.empty()) throw Error(Errc::EmptyCluster, "cluster has no nodes");
  ClusterState state;
  for (const NodeSpec& node : nodes) {
    node.validate();
    if (!state.nodes_.emplace(node.node_id, node).second)
      throw Error(Errc::DuplicateNodeId, node.node_id);
    state.alloc_.emplace(node.node_id, NodeAllocation{});
  }
  return state;
}

const char* objective_name(Objective objective) {
  switch (objective) {
    case Objective::MinRuntime: return "min_runtime";
    case Objective::MinEnergy: return "min_energy";
    case Objective::MaxSecurity: return "max_security";
  }
  return "?";
}

std::optional<Objective> objective_from_name(std::string_view name) {
  if (name == "min_runtime") return Objective::MinRuntime;
  if (name == "min_energy") return Objective::MinEnergy;
  if (name == "max_security") return Objective::MaxSecurity;
  return std::nullopt;
}

}  // namespace tiersim

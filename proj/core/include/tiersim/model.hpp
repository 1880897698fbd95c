#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tiersim/error.hpp"

namespace tiersim {

// Time is integer microseconds internally; reports convert to seconds.
using Micros = std::int64_t;
inline constexpr Micros kMicrosPerSecond = 1'000'000;

Micros seconds_to_micros(double seconds);
double micros_to_seconds(Micros us);

// Infrastructure tiers, ordered by distance from the data source.
enum class Layer : int { Edge = 0, Fog = 1, Cloud = 2 };

inline constexpr std::array<Layer, 3> kAllLayers = {Layer::Edge, Layer::Fog, Layer::Cloud};

const char* layer_name(Layer layer);
std::optional<Layer> layer_from_name(std::string_view name);

// Trusted-execution capabilities. Unordered; a task is satisfied by any node
// whose tag set includes the task's required set.
enum class SecurityTag : int { Sgx = 0, TrustZone = 1 };

const char* security_tag_name(SecurityTag tag);
std::optional<SecurityTag> security_tag_from_name(std::string_view name);

class SecuritySet {
 public:
  static constexpr int kMaxTags = 2;

  SecuritySet() = default;
  SecuritySet(std::initializer_list<SecurityTag> tags) {
    for (SecurityTag t : tags) insert(t);
  }

  void insert(SecurityTag tag) { bits_ |= bit(tag); }
  bool contains(SecurityTag tag) const { return (bits_ & bit(tag)) != 0; }
  bool subset_of(const SecuritySet& other) const { return (bits_ & ~other.bits_) == 0; }
  int count() const { return (bits_ & 1) + ((bits_ >> 1) & 1); }
  bool empty() const { return bits_ == 0; }

  std::vector<SecurityTag> tags() const;

  friend bool operator==(const SecuritySet&, const SecuritySet&) = default;

 private:
  static unsigned bit(SecurityTag tag) { return 1u << static_cast<int>(tag); }
  unsigned bits_ = 0;
};

// Affine-with-cap node power: idle draw plus a per-busy-core increment,
// clipped at the thermal cap.
struct PowerModel {
  double idle_watts = 0.0;
  double per_core_watts = 0.0;
  double cap_watts = 0.0;

  double power(double busy_cores) const;
  void validate() const;
};

struct NodeSpec {
  std::string node_id;
  Layer layer = Layer::Edge;
  int cores = 1;
  std::int64_t memory_mib = 1;
  SecuritySet security;
  PowerModel power_model;
  std::int64_t net_bandwidth_bps = 1;  // uplink toward the parent layer

  void validate() const;
};

// Work demands follow a serial/parallel split with a per-extra-node
// coordination overhead; see runtime_model_seconds.
struct TaskSpec {
  std::string task_id;
  double serial_work = 0.0;        // core-seconds
  double parallel_work = 0.0;      // core-seconds
  double per_node_overhead_s = 0.0;
  std::int64_t memory_demand_mib = 0;  // per node
  int cores_per_node = 1;
  SecuritySet required_security;
  int max_nodes = 1;
  std::int64_t state_size_bytes = 0;  // migration payload
  std::optional<double> deadline_s;   // relative to arrival

  void validate() const;
};

// A task's node assignment. Always within a single layer; node_ids are kept
// sorted and unique.
struct Placement {
  std::string task_id;
  std::vector<std::string> node_ids;

  friend bool operator==(const Placement&, const Placement&) = default;
};

enum class TaskState { Pending, Running, Migrating, Done, Failed };

const char* task_state_name(TaskState state);
bool transition_allowed(TaskState from, TaskState to);

struct ExecutionWindow {
  std::string node_id;
  Micros start = 0;
  Micros end = 0;
};

class TaskRecord {
 public:
  explicit TaskRecord(TaskSpec spec) : spec_(std::move(spec)) {}

  const TaskSpec& spec() const { return spec_; }
  const std::vector<ExecutionWindow>& windows() const { return windows_; }
  TaskState state() const { return state_; }

  // Rejects end < start and overlap with an existing window on the same node.
  void add_window(const ExecutionWindow& window);
  void set_state(TaskState next);

 private:
  TaskSpec spec_;
  std::vector<ExecutionWindow> windows_;
  TaskState state_ = TaskState::Pending;
};

struct NodeAllocation {
  int used_cores = 0;
  std::int64_t used_memory_mib = 0;
  std::set<std::string> tasks;
};

// Node inventory plus live reservations. Value-copyable so callers can score
// hypothetical states (e.g. "the cluster without task X").
class ClusterState {
 public:
  const std::map<std::string, NodeSpec>& nodes() const { return nodes_; }
  const NodeSpec& node(const std::string& node_id) const;
  const NodeAllocation& allocation(const std::string& node_id) const;

  int free_cores(const std::string& node_id) const;
  std::int64_t free_memory_mib(const std::string& node_id) const;
  bool node_busy(const std::string& node_id) const;

  std::vector<std::string> nodes_in_layer(Layer layer) const;

  void allocate(const TaskSpec& task, const std::vector<std::string>& node_ids);
  void release(const TaskSpec& task, const std::vector<std::string>& node_ids);

  friend ClusterState validate_cluster(const std::vector<NodeSpec>& nodes);

 private:
  std::map<std::string, NodeSpec> nodes_;
  std::map<std::string, NodeAllocation> alloc_;
};

// Indexes the node list; rejects empty input and duplicate ids.
ClusterState validate_cluster(const std::vector<NodeSpec>& nodes);

enum class Objective { MinRuntime, MinEnergy, MaxSecurity };

const char* objective_name(Objective objective);
std::optional<Objective> objective_from_name(std::string_view name);

}  // namespace tiersim

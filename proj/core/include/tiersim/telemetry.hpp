#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tiersim/energy.hpp"
#include "tiersim/model.hpp"

namespace tiersim {

struct ResourceMetrics {
  Micros timestamp = 0;
  double cpu_busy_cores = 0.0;
  double memory_used_mib = 0.0;
  double net_bytes_per_sec = 0.0;
};

enum class LifecycleKind {
  Placed,
  Started,
  MigrationStarted,
  MigrationFinished,
  Finished,
  Failed,
};

const char* lifecycle_kind_name(LifecycleKind kind);
std::optional<LifecycleKind> lifecycle_kind_from_name(std::string_view name);

struct LifecycleEvent {
  Micros timestamp = 0;
  std::string task_id;
  LifecycleKind kind = LifecycleKind::Placed;
  std::vector<std::string> node_ids;

  friend bool operator==(const LifecycleEvent&, const LifecycleEvent&) = default;
};

// In-memory probe store: append-only per-node power/resource logs plus a
// global lifecycle event log. Appends for one node are serialized internally;
// queries copy out under the same lock, so they observe a consistent prefix.
class MetricsStore {
 public:
  explicit MetricsStore(const std::vector<std::string>& node_ids);
  static MetricsStore for_cluster(const ClusterState& cluster);

  MetricsStore(const MetricsStore&) = delete;
  MetricsStore& operator=(const MetricsStore&) = delete;
  MetricsStore(MetricsStore&&) = default;
  MetricsStore& operator=(MetricsStore&&) = default;

  void append_sample(const std::string& node_id, PowerSample sample);
  void append_metrics(const std::string& node_id, ResourceMetrics metrics);
  void append_event(LifecycleEvent event);

  // All samples inside the window plus the bracketing sample on each side
  // when present, so integration can interpolate at the edges.
  PowerTrace query_window(const std::string& node_id, TimeWindow window) const;
  PowerTrace full_trace(const std::string& node_id) const;
  std::map<std::string, PowerTrace> all_traces() const;

  std::vector<ResourceMetrics> metrics_tail(const std::string& node_id, std::size_t count) const;
  std::vector<LifecycleEvent> events() const;
  std::vector<std::string> node_ids() const;

 private:
  struct NodeLog {
    mutable std::mutex mu;
    std::vector<PowerSample> power;
    std::vector<ResourceMetrics> metrics;
  };

  // Returns a mutable log even from const queries: the entries live behind
  // unique_ptr and their mutex must be lockable on the read path.
  NodeLog& log(const std::string& node_id) const;

  std::map<std::string, std::unique_ptr<NodeLog>> logs_;
  std::unique_ptr<std::mutex> events_mu_ = std::make_unique<std::mutex>();
  std::vector<LifecycleEvent> events_;
};

// Power trace CSV: header `node_id,timestamp_us,watts`, LF line endings,
// integer timestamps, watts with up to six fraction digits (trailing zeros
// trimmed, at least one kept). Traces are emitted in node-id order.
std::string power_csv(const std::map<std::string, PowerTrace>& traces);
std::map<std::string, PowerTrace> parse_power_csv(const std::string& text,
                                                  const std::string& origin = "");
std::map<std::string, PowerTrace> load_power_csv(const std::filesystem::path& path);
void dump_power_csv(const std::map<std::string, PowerTrace>& traces,
                    const std::filesystem::path& path);

// Lifecycle event CSV: header `timestamp_us,task_id,kind,node_ids`, node ids
// joined with ';'.
std::string events_csv(const std::vector<LifecycleEvent>& events);
std::vector<LifecycleEvent> parse_events_csv(const std::string& text,
                                             const std::string& origin = "");
std::vector<LifecycleEvent> load_events_csv(const std::filesystem::path& path);
void dump_events_csv(const std::vector<LifecycleEvent>& events,
                     const std::filesystem::path& path);

// Canonical decimal formatting shared by every CSV emitter: fixed notation,
// up to max_frac fraction digits, trailing zeros trimmed but one kept.
std::string format_decimal(double value, int max_frac = 6);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tiersim

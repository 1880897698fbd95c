#include "tiersim/sched.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "tiersim/control.hpp"

namespace tiersim {

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::Fifo: return "fifo";
    case Strategy::BestFitCores: return "best_fit_cores";
    case Strategy::EnergyGreedy: return "energy_greedy";
  }
  return "?";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "fifo") return Strategy::Fifo;
  if (name == "best_fit_cores") return Strategy::BestFitCores;
  if (name == "energy_greedy") return Strategy::EnergyGreedy;
  return std::nullopt;
}

Strategy strategy_for_layer(const LayerStrategies& strategies, Layer layer) {
  auto it = strategies.find(layer);
  return it == strategies.end() ? Strategy::Fifo : it->second;
}

bool feasible(const NodeSpec& node, const NodeAllocation& alloc, const TaskSpec& task) {
  if (node.cores - alloc.used_cores < task.cores_per_node) return false;
  if (node.memory_mib - alloc.used_memory_mib < task.memory_demand_mib) return false;
  return task.required_security.subset_of(node.security);
}

bool feasible(const ClusterState& cluster, const std::string& node_id, const TaskSpec& task) {
  return feasible(cluster.node(node_id), cluster.allocation(node_id), task);
}

Placement make_placement(const TaskSpec& task, const ClusterState& cluster,
                         std::vector<std::string> node_ids) {
  std::sort(node_ids.begin(), node_ids.end());
  node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
  Placement placement{task.task_id, std::move(node_ids)};
  if (!placement_valid(task, cluster, placement))
    throw Error(Errc::InfeasiblePlacement, task.task_id);
  return placement;
}

bool placement_valid(const TaskSpec& task, const ClusterState& cluster,
                     const Placement& placement) {
  if (placement.node_ids.empty()) return false;
  if (static_cast<int>(placement.node_ids.size()) > task.max_nodes) return false;

  std::set<std::string> seen;
  std::optional<Layer> layer;
  for (const std::string& id : placement.node_ids) {
    if (!seen.insert(id).second) return false;
    auto it = cluster.nodes().find(id);
    if (it == cluster.nodes().end()) return false;
    if (layer && it->second.layer != *layer) return false;
    layer = it->second.layer;
    if (!feasible(it->second, cluster.allocation(id), task)) return false;
  }
  return true;
}

namespace {

std::vector<std::string> feasible_in_layer(const TaskSpec& task, const ClusterState& cluster,
                                           Layer layer) {
  std::vector<std::string> out;
  for (const std::string& id : cluster.nodes_in_layer(layer))
    if (feasible(cluster, id, task)) out.push_back(id);
  return out;  // nodes_in_layer is already id-sorted
}

double busy_power_after(const ClusterState& cluster, const std::string& node_id,
                        const TaskSpec& task) {
  const NodeSpec& node = cluster.node(node_id);
  const int busy = cluster.allocation(node_id).used_cores + task.cores_per_node;
  return node.power_model.power(busy);
}

// Orders feasible node ids by the configured strategy, in place.
void sort_by_strategy(std::vector<std::string>& ids, const TaskSpec& task,
                      const ClusterState& cluster, Strategy strategy) {
  switch (strategy) {
    case Strategy::Fifo:
      // Already id-sorted.
      return;
    case Strategy::BestFitCores:
      std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        const int slack_a = cluster.free_cores(a) - task.cores_per_node;
        const int slack_b = cluster.free_cores(b) - task.cores_per_node;
        return std::tie(slack_a, a) < std::tie(slack_b, b);
      });
      return;
    case Strategy::EnergyGreedy:
      std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        const int idle_a = cluster.node_busy(a) ? 0 : 1;
        const int idle_b = cluster.node_busy(b) ? 0 : 1;
        const double pc_a = cluster.node(a).power_model.per_core_watts;
        const double pc_b = cluster.node(b).power_model.per_core_watts;
        return std::tie(idle_a, pc_a, a) < std::tie(idle_b, pc_b, b);
      });
      return;
  }
}

// Node order used by the global scheduler inside one layer. For MinRuntime
// the score ignores node identity, so the layer's own strategy decides; for
// the other objectives the order mirrors the per-node score contribution so
// that taking a prefix minimizes the placement score.
std::vector<std::string> global_candidate_order(const TaskSpec& task, const ClusterState& cluster,
                                                std::vector<std::string> ids, Strategy strategy,
                                                Objective objective) {
  switch (objective) {
    case Objective::MinRuntime:
      sort_by_strategy(ids, task, cluster, strategy);
      return ids;
    case Objective::MinEnergy:
      std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        const double pa = busy_power_after(cluster, a, task);
        const double pb = busy_power_after(cluster, b, task);
        return std::tie(pa, a) < std::tie(pb, b);
      });
      return ids;
    case Objective::MaxSecurity:
      std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        const int deficit_a = SecuritySet::kMaxTags - cluster.node(a).security.count();
        const int deficit_b = SecuritySet::kMaxTags - cluster.node(b).security.count();
        const double pa = busy_power_after(cluster, a, task);
        const double pb = busy_power_after(cluster, b, task);
        return std::tie(deficit_a, pa, a) < std::tie(deficit_b, pb, b);
      });
      return ids;
  }
  return ids;
}

}  // namespace

Placement place_in_layer(const TaskSpec& task, const ClusterState& cluster, Layer layer,
                         Strategy strategy, int width) {
  if (width < 1) throw Error(Errc::InvalidSpec, "width must be >= 1");
  if (width > task.max_nodes)
    throw Error(Errc::InvalidSpec, task.task_id + ": width exceeds max_nodes");
  std::vector<std::string> ids = feasible_in_layer(task, cluster, layer);
  if (static_cast<int>(ids.size()) < width)
    throw Error(Errc::NoCapacity, task.task_id + ": layer " + layer_name(layer) + " has " +
                                      std::to_string(ids.size()) + " feasible nodes, need " +
                                      std::to_string(width));
  sort_by_strategy(ids, task, cluster, strategy);
  ids.resize(width);
  std::sort(ids.begin(), ids.end());
  return Placement{task.task_id, std::move(ids)};
}

Placement place_global(const TaskSpec& task, const ClusterState& cluster,
                       const LayerStrategies& strategies, Objective objective) {
  std::optional<Placement> best;
  double best_score = 0.0;

  for (Layer layer : kAllLayers) {
    std::vector<std::string> ordered = global_candidate_order(
        task, cluster, feasible_in_layer(task, cluster, layer),
        strategy_for_layer(strategies, layer), objective);
    const int max_width = std::min<int>(task.max_nodes, static_cast<int>(ordered.size()));
    for (int width = 1; width <= max_width; ++width) {
      std::vector<std::string> ids(ordered.begin(), ordered.begin() + width);
      std::sort(ids.begin(), ids.end());
      Placement candidate{task.task_id, std::move(ids)};
      double score = 0.0;
      try {
        score = estimate_objective(candidate, task, cluster, objective);
      } catch (const Error& e) {
        if (e.code() == Errc::InfeasiblePlacement) continue;  // e.g. deadline unreachable
        throw;
      }
      if (!best || score < best_score) {
        best = std::move(candidate);
        best_score = score;
      }
    }
  }

  if (!best) throw Error(Errc::NoCapacity, task.task_id + ": no layer can host the task");
  return *best;
}

}  // namespace tiersim

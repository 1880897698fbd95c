#pragma once

#include <map>
#include <string>
#include <vector>

#include "tiersim/model.hpp"

namespace tiersim {

// Per-layer node selection rule. Layers of one cluster may differ.
enum class Strategy { Fifo, BestFitCores, EnergyGreedy };

const char* strategy_name(Strategy strategy);
std::optional<Strategy> strategy_from_name(std::string_view name);

using LayerStrategies = std::map<Layer, Strategy>;

Strategy strategy_for_layer(const LayerStrategies& strategies, Layer layer);

// True iff the node has the cores, memory and security tags the task needs,
// given its current allocation. Total function.
bool feasible(const NodeSpec& node, const NodeAllocation& alloc, const TaskSpec& task);
bool feasible(const ClusterState& cluster, const std::string& node_id, const TaskSpec& task);

// Validating constructor for Placement: non-empty, unique, single-layer,
// within max_nodes, every node feasible. Throws InfeasiblePlacement.
Placement make_placement(const TaskSpec& task, const ClusterState& cluster,
                         std::vector<std::string> node_ids);

// Non-throwing form of the same checks, for property tests and post-hoc
// verification.
bool placement_valid(const TaskSpec& task, const ClusterState& cluster,
                     const Placement& placement);

// Picks `width` feasible nodes within one layer according to the strategy.
//   Fifo          lowest node_id first
//   BestFitCores  smallest free-core slack first
//   EnergyGreedy  already-busy nodes first, then lowest per_core_watts
// All ties break on node_id. Throws NoCapacity when fewer than `width`
// feasible nodes exist.
Placement place_in_layer(const TaskSpec& task, const ClusterState& cluster, Layer layer,
                         Strategy strategy, int width);

// Controller-side global placement: scans (layer, width) candidates bottom-up
// (edge first, widths ascending) and returns the candidate with the best
// objective score; ties keep the lowest layer, then the smallest width.
// Within a layer the width nodes are chosen to optimize the objective score
// (strategy order decides among score-equivalent nodes). Throws NoCapacity
// when no layer can host the task.
Placement place_global(const TaskSpec& task, const ClusterState& cluster,
                       const LayerStrategies& strategies, Objective objective);

}  // namespace tiersim

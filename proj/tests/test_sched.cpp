#include <doctest.h>

#include <algorithm>
#include <climits>

#include "support/oracles.hpp"
#include "tiersim/control.hpp"
#include "tiersim/sched.hpp"

using namespace tiersim;
namespace tt = tiersim::testing;

namespace {

NodeSpec fog_node(const std::string& id, int cores = 4, double idle = 1.9, double per_core = 0.775,
                  double cap = 5.0) {
  NodeSpec node;
  node.node_id = id;
  node.layer = Layer::Fog;
  node.cores = cores;
  node.memory_mib = 1024;
  node.power_model = PowerModel{idle, per_core, cap};
  node.net_bandwidth_bps = 12'500'000;
  return node;
}

TaskSpec parallel_task(const std::string& id, double work, int cores_per_node, int max_nodes) {
  TaskSpec task;
  task.task_id = id;
  task.parallel_work = work;
  task.cores_per_node = cores_per_node;
  task.max_nodes = max_nodes;
  task.memory_demand_mib = 64;
  return task;
}

const LayerStrategies kAllFifo = {{Layer::Edge, Strategy::Fifo},
                                  {Layer::Fog, Strategy::Fifo},
                                  {Layer::Cloud, Strategy::Fifo}};

}  // namespace

TEST_CASE("feasibility is capacity plus security inclusion") {
  auto cluster = validate_cluster({fog_node("rpi1")});

  TaskSpec needs_sgx = parallel_task("t", 10, 1, 1);
  needs_sgx.required_security.insert(SecurityTag::Sgx);
  CHECK_FALSE(feasible(cluster, "rpi1", needs_sgx));

  const TaskSpec four_cores = parallel_task("t", 10, 4, 1);
  CHECK(feasible(cluster, "rpi1", four_cores));

  cluster.allocate(parallel_task("other", 10, 1, 1), {"rpi1"});
  CHECK_FALSE(feasible(cluster, "rpi1", four_cores));  // only 3 cores free now
}

TEST_CASE("feasibility matches an independent predicate re-implementation") {
  std::mt19937_64 rng(0x5eed0201);
  for (int iter = 0; iter < 500; ++iter) {
    const NodeSpec node = tt::random_node(rng, "n", Layer::Fog);
    NodeAllocation alloc;
    alloc.used_cores = static_cast<int>(tt::uniform_int(rng, 0, node.cores));
    alloc.used_memory_mib = tt::uniform_int(rng, 0, node.memory_mib);
    const TaskSpec task = tt::random_task(rng, "t");
    CHECK(feasible(node, alloc, task) == tt::feasible_oracle(node, alloc, task));
  }
}

TEST_CASE("three free identical nodes fill a width-3 request") {
  const auto cluster = validate_cluster({fog_node("rpi1"), fog_node("rpi2"), fog_node("rpi3")});
  const Placement p = place_in_layer(parallel_task("t", 300, 4, 3), cluster, Layer::Fog,
                                     Strategy::Fifo, 3);
  CHECK(p.node_ids == std::vector<std::string>{"rpi1", "rpi2", "rpi3"});
}

TEST_CASE("insufficient feasible nodes raise NoCapacity") {
  auto cluster = validate_cluster({fog_node("rpi1"), fog_node("rpi2")});
  cluster.allocate(parallel_task("other", 10, 4, 1), {"rpi2"});
  try {
    place_in_layer(parallel_task("t", 10, 4, 2), cluster, Layer::Fog, Strategy::Fifo, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoCapacity);
  }
}

TEST_CASE("fifo picks the lowest node ids") {
  const auto cluster = validate_cluster({fog_node("rpi3"), fog_node("rpi1"), fog_node("rpi2")});
  const Placement p =
      place_in_layer(parallel_task("t", 10, 1, 2), cluster, Layer::Fog, Strategy::Fifo, 2);
  CHECK(p.node_ids == std::vector<std::string>{"rpi1", "rpi2"});
}

TEST_CASE("best-fit minimizes free-core slack") {
  auto cluster = validate_cluster(
      {fog_node("big", 8), fog_node("mid", 4), fog_node("small", 2)});
  const TaskSpec task = parallel_task("t", 10, 2, 1);
  const Placement p = place_in_layer(task, cluster, Layer::Fog, Strategy::BestFitCores, 1);
  CHECK(p.node_ids == std::vector<std::string>{"small"});
}

TEST_CASE("best-fit slack equals the exhaustive-search minimum") {
  std::mt19937_64 rng(0x5eed0202);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<NodeSpec> nodes;
    const int count = static_cast<int>(tt::uniform_int(rng, 1, 4));
    for (int i = 0; i < count; ++i) {
      NodeSpec node = tt::random_node(rng, "n" + std::to_string(i), Layer::Fog);
      node.memory_mib = 4096;  // make cores the binding resource
      nodes.push_back(node);
    }
    auto cluster = validate_cluster(nodes);
    TaskSpec task = parallel_task("t", 10, static_cast<int>(tt::uniform_int(rng, 1, 3)),
                                  count);
    task.memory_demand_mib = 0;
    task.required_security = {};

    std::vector<std::string> feas;
    for (const NodeSpec& node : nodes)
      if (feasible(cluster, node.node_id, task)) feas.push_back(node.node_id);
    if (feas.empty()) continue;
    const int width = static_cast<int>(tt::uniform_int(rng, 1, static_cast<int>(feas.size())));

    const Placement got = place_in_layer(task, cluster, Layer::Fog,
                                         Strategy::BestFitCores, width);
    auto slack_of = [&](const std::vector<std::string>& ids) {
      int slack = 0;
      for (const std::string& id : ids) slack += cluster.free_cores(id) - task.cores_per_node;
      return slack;
    };

    // Exhaustive minimum over all width-subsets of the feasible nodes.
    int best = INT_MAX;
    std::vector<std::string> subset;
    const std::size_t n = feas.size();
    for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
      if (std::popcount(mask) != width) continue;
      subset.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1ull << i)) subset.push_back(feas[i]);
      best = std::min(best, slack_of(subset));
    }
    CHECK(slack_of(got.node_ids) == best);
  }
}

TEST_CASE("energy-greedy prefers busy nodes, then cheap cores") {
  auto cluster = validate_cluster({fog_node("cheap", 4, 1.0, 0.3, 4.0),
                                   fog_node("costly", 4, 1.0, 1.2, 8.0),
                                   fog_node("warm", 4, 1.0, 2.0, 10.0)});
  cluster.allocate(parallel_task("resident", 10, 1, 1), {"warm"});

  const TaskSpec task = parallel_task("t", 10, 1, 2);
  const Placement first =
      place_in_layer(task, cluster, Layer::Fog, Strategy::EnergyGreedy, 1);
  CHECK(first.node_ids == std::vector<std::string>{"warm"});  // busy wins

  const Placement two = place_in_layer(task, cluster, Layer::Fog, Strategy::EnergyGreedy, 2);
  CHECK(two.node_ids == std::vector<std::string>{"cheap", "warm"});  // then lowest per-core

  CHECK_THROWS_AS(place_in_layer(task, cluster, Layer::Fog, Strategy::EnergyGreedy, 3), Error);
}

TEST_CASE("placement functions are deterministic") {
  std::mt19937_64 rng(0x5eed0203);
  for (int iter = 0; iter < 50; ++iter) {
    const auto nodes = tt::random_cluster_nodes(rng, 5);
    const auto cluster = validate_cluster(nodes);
    const TaskSpec task = tt::random_task(rng, "t");
    const auto strategies = tt::random_strategies(rng);
    for (Objective objective :
         {Objective::MinRuntime, Objective::MinEnergy, Objective::MaxSecurity}) {
      try {
        const Placement a = place_global(task, cluster, strategies, objective);
        const Placement b = place_global(task, cluster, strategies, objective);
        CHECK(a == b);
        CHECK(placement_valid(task, cluster, a));
      } catch (const Error& e) {
        CHECK(e.code() == Errc::NoCapacity);
      }
    }
  }
}

TEST_CASE("global placement spreads parallel work over the fog") {
  // One slow edge gateway vs three fog nodes: 300 core-s of parallel work
  // runs 100 s on one node but ~33 s across three.
  std::vector<NodeSpec> nodes = {fog_node("rpi1"), fog_node("rpi2"), fog_node("rpi3")};
  NodeSpec gate = fog_node("gate1", 4);
  gate.layer = Layer::Edge;
  nodes.push_back(gate);
  const auto cluster = validate_cluster(nodes);

  TaskSpec task = parallel_task("t", 300, 1, 3);
  const Placement p = place_global(task, cluster, kAllFifo, Objective::MinRuntime);
  CHECK(p.node_ids == std::vector<std::string>{"rpi1", "rpi2", "rpi3"});
}

TEST_CASE("security requirements dominate layer preference") {
  std::vector<NodeSpec> nodes = {fog_node("rpi1"), fog_node("rpi2")};
  NodeSpec vault = fog_node("vault", 8);
  vault.layer = Layer::Cloud;
  vault.security.insert(SecurityTag::TrustZone);
  nodes.push_back(vault);
  const auto cluster = validate_cluster(nodes);

  TaskSpec task = parallel_task("t", 100, 1, 2);
  task.required_security.insert(SecurityTag::TrustZone);
  const Placement p = place_global(task, cluster, kAllFifo, Objective::MinRuntime);
  CHECK(p.node_ids == std::vector<std::string>{"vault"});
}

TEST_CASE("ties prefer the lowest layer, then the smallest width") {
  // Serial-only work: every width and layer predicts the same runtime.
  std::vector<NodeSpec> nodes = {fog_node("rpi1"), fog_node("rpi2")};
  NodeSpec gate = fog_node("gate1");
  gate.layer = Layer::Edge;
  nodes.push_back(gate);
  const auto cluster = validate_cluster(nodes);

  TaskSpec task = parallel_task("t", 0, 1, 2);
  task.serial_work = 60.0;
  const Placement p = place_global(task, cluster, kAllFifo, Objective::MinRuntime);
  CHECK(p.node_ids == std::vector<std::string>{"gate1"});
}

TEST_CASE("global placement achieves the exhaustive optimum") {
  std::mt19937_64 rng(0x5eed0204);
  int solved = 0;
  for (int iter = 0; iter < 300; ++iter) {
    const auto nodes = tt::random_cluster_nodes(rng, static_cast<int>(tt::uniform_int(rng, 1, 4)));
    const auto cluster = validate_cluster(nodes);
    TaskSpec task = tt::random_task(rng, "t");
    task.max_nodes = static_cast<int>(tt::uniform_int(rng, 1, 4));
    const auto strategies = tt::random_strategies(rng);

    for (Objective objective :
         {Objective::MinRuntime, Objective::MinEnergy, Objective::MaxSecurity}) {
      const auto oracle = tt::brute_force_best_score(task, cluster, objective);
      try {
        const Placement got = place_global(task, cluster, strategies, objective);
        const double score = estimate_objective(got, task, cluster, objective);
        REQUIRE(oracle.has_value());
        CHECK(score == doctest::Approx(*oracle).epsilon(1e-12));
        ++solved;
      } catch (const Error& e) {
        REQUIRE(e.code() == Errc::NoCapacity);
        CHECK_FALSE(oracle.has_value());
      }
    }
  }
  CHECK(solved > 100);  // the generator must not degenerate into all-infeasible
}

TEST_CASE("scaling every power model leaves the min-energy argmin unchanged") {
  std::mt19937_64 rng(0x5eed0205);
  for (int iter = 0; iter < 50; ++iter) {
    const auto nodes = tt::random_cluster_nodes(rng, 4);
    const auto cluster = validate_cluster(nodes);
    TaskSpec task = tt::random_task(rng, "t");
    task.required_security = {};
    task.deadline_s.reset();

    std::vector<NodeSpec> scaled_nodes = nodes;
    const double k = tt::uniform(rng, 0.5, 4.0);
    for (NodeSpec& node : scaled_nodes) {
      node.power_model.idle_watts *= k;
      node.power_model.per_core_watts *= k;
      node.power_model.cap_watts *= k;
    }
    const auto scaled = validate_cluster(scaled_nodes);

    try {
      const Placement a = place_global(task, cluster, kAllFifo, Objective::MinEnergy);
      const Placement b = place_global(task, scaled, kAllFifo, Objective::MinEnergy);
      CHECK(a.node_ids == b.node_ids);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoCapacity);
    }
  }
}

TEST_CASE("placements that cannot meet the deadline are skipped") {
  const auto cluster = validate_cluster({fog_node("rpi1"), fog_node("rpi2"), fog_node("rpi3")});
  TaskSpec task = parallel_task("t", 300, 1, 3);
  task.deadline_s = 120.0;  // one node needs 300 s; three need 100 s

  const Placement p = place_global(task, cluster, kAllFifo, Objective::MinEnergy);
  CHECK(p.node_ids.size() == 3);

  task.deadline_s = 50.0;  // unreachable at any width
  CHECK_THROWS_AS(place_global(task, cluster, kAllFifo, Objective::MinEnergy), Error);
}

#include <doctest.h>

#include "support/oracles.hpp"
#include "tiersim/model.hpp"
#include "tiersim/sched.hpp"

using namespace tiersim;
namespace tt = tiersim::testing;

namespace {

NodeSpec rpi(const std::string& id, Layer layer = Layer::Fog) {
  NodeSpec node;
  node.node_id = id;
  node.layer = layer;
  node.cores = 4;
  node.memory_mib = 1024;
  node.power_model = PowerModel{1.9, 0.775, 5.0};
  node.net_bandwidth_bps = 12'500'000;
  return node;
}

}  // namespace

TEST_CASE("layer ordering is total and transitive") {
  const auto layers = kAllLayers;
  CHECK(Layer::Edge < Layer::Fog);
  CHECK(Layer::Fog < Layer::Cloud);
  for (Layer a : layers)
    for (Layer b : layers) {
      const bool lt = a < b;
      const bool gt = b < a;
      const bool eq = a == b;
      CHECK((lt ? 1 : 0) + (gt ? 1 : 0) + (eq ? 1 : 0) == 1);
      for (Layer c : layers)
        if (a < b && b < c) CHECK(a < c);
    }
}

TEST_CASE("security sets are inclusion-checked capabilities") {
  SecuritySet none;
  SecuritySet sgx{SecurityTag::Sgx};
  SecuritySet both{SecurityTag::Sgx, SecurityTag::TrustZone};
  CHECK(none.subset_of(none));
  CHECK(none.subset_of(both));
  CHECK(sgx.subset_of(both));
  CHECK_FALSE(both.subset_of(sgx));
  CHECK(both.count() == 2);
  CHECK(sgx.count() == 1);
}

TEST_CASE("power model is capped and non-decreasing in busy cores") {
  const PowerModel pm{1.9, 0.775, 5.0};
  CHECK(pm.power(0) == doctest::Approx(1.9));
  CHECK(pm.power(4) == doctest::Approx(5.0));
  CHECK(pm.power(10) == doctest::Approx(5.0));  // cap binds
  double prev = -1.0;
  for (int busy = 0; busy <= 12; ++busy) {
    const double p = pm.power(busy);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("validate_cluster indexes nodes with zero allocations") {
  const auto cluster = validate_cluster({rpi("rpi1"), rpi("rpi2"), rpi("rpi3")});
  CHECK(cluster.nodes().size() == 3);
  for (const auto& [id, node] : cluster.nodes()) {
    CHECK(cluster.free_cores(id) == 4);
    CHECK(cluster.allocation(id).tasks.empty());
  }
}

TEST_CASE("validate_cluster rejects degenerate input") {
  CHECK_THROWS_WITH_AS(validate_cluster({}), doctest::Contains("EmptyCluster"), Error);
  CHECK_THROWS_AS(validate_cluster({rpi("n1"), rpi("n1")}), Error);
  try {
    validate_cluster({rpi("n1"), rpi("n1")});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateNodeId);
  }
}

TEST_CASE("allocate and release round-trip, overcommit rejected") {
  auto cluster = validate_cluster({rpi("rpi1")});
  TaskSpec task;
  task.task_id = "t";
  task.parallel_work = 10.0;
  task.cores_per_node = 3;
  task.memory_demand_mib = 600;

  cluster.allocate(task, {"rpi1"});
  CHECK(cluster.free_cores("rpi1") == 1);
  CHECK(cluster.free_memory_mib("rpi1") == 424);
  CHECK(cluster.node_busy("rpi1"));
  CHECK_THROWS_AS(cluster.allocate(task, {"rpi1"}), Error);  // NoCapacity
  cluster.release(task, {"rpi1"});
  CHECK(cluster.free_cores("rpi1") == 4);
  CHECK_FALSE(cluster.node_busy("rpi1"));
}

TEST_CASE("task record enforces the lifecycle state machine") {
  TaskSpec spec;
  spec.task_id = "t";
  spec.parallel_work = 1.0;

  TaskRecord record(spec);
  CHECK(record.state() == TaskState::Pending);
  CHECK_THROWS_AS(record.set_state(TaskState::Done), Error);
  record.set_state(TaskState::Running);
  record.set_state(TaskState::Migrating);
  CHECK_THROWS_AS(record.set_state(TaskState::Done), Error);
  record.set_state(TaskState::Running);
  record.set_state(TaskState::Done);
  CHECK_THROWS_AS(record.set_state(TaskState::Running), Error);

  TaskRecord failed(spec);
  failed.set_state(TaskState::Failed);  // unschedulable at arrival
  CHECK_THROWS_AS(failed.set_state(TaskState::Running), Error);
}

TEST_CASE("task record rejects malformed or overlapping windows") {
  TaskSpec spec;
  spec.task_id = "t";
  spec.parallel_work = 1.0;
  TaskRecord record(spec);

  record.add_window({"rpi1", 0, 1'000'000});
  record.add_window({"rpi1", 1'000'000, 2'000'000});  // touching is fine
  record.add_window({"rpi2", 500'000, 1'500'000});    // other nodes may overlap
  CHECK_THROWS_AS(record.add_window({"rpi1", 500'000, 700'000}), Error);
  CHECK_THROWS_AS(record.add_window({"rpi1", 3'000'000, 2'500'000}), Error);
}

TEST_CASE("placement construction accepts only feasible single-layer sets") {
  auto nodes = std::vector<NodeSpec>{rpi("rpi1"), rpi("rpi2"), rpi("edge1", Layer::Edge)};
  nodes[2].security = SecuritySet{SecurityTag::TrustZone};
  const auto cluster = validate_cluster(nodes);

  TaskSpec task;
  task.task_id = "t";
  task.parallel_work = 10.0;
  task.cores_per_node = 2;
  task.max_nodes = 2;

  const Placement ok = make_placement(task, cluster, {"rpi2", "rpi1"});
  CHECK(ok.node_ids == std::vector<std::string>{"rpi1", "rpi2"});
  CHECK(placement_valid(task, cluster, ok));

  CHECK_THROWS_AS(make_placement(task, cluster, {}), Error);
  CHECK_THROWS_AS(make_placement(task, cluster, {"rpi1", "edge1"}), Error);  // mixed layers
  CHECK_THROWS_AS(make_placement(task, cluster, {"nope"}), Error);

  TaskSpec sgx = task;
  sgx.required_security.insert(SecurityTag::Sgx);
  CHECK_THROWS_AS(make_placement(sgx, cluster, {"rpi1"}), Error);
}

TEST_CASE("random placements: valid ones accepted, invalid ones rejected") {
  std::mt19937_64 rng(0x5eed0001);
  for (int iter = 0; iter < 200; ++iter) {
    const auto nodes = tt::random_cluster_nodes(rng, static_cast<int>(tt::uniform_int(rng, 2, 6)));
    const auto cluster = validate_cluster(nodes);
    const TaskSpec task = tt::random_task(rng, "t");

    std::vector<std::string> picked;
    for (const NodeSpec& node : nodes)
      if (tt::chance(rng, 0.5)) picked.push_back(node.node_id);
    if (picked.empty()) picked.push_back(nodes.front().node_id);

    bool expect_valid = static_cast<int>(picked.size()) <= task.max_nodes;
    for (const std::string& id : picked) {
      if (cluster.node(id).layer != cluster.node(picked.front()).layer) expect_valid = false;
      if (!tt::feasible_oracle(cluster.node(id), cluster.allocation(id), task))
        expect_valid = false;
    }

    if (expect_valid) {
      const Placement p = make_placement(task, cluster, picked);
      CHECK(placement_valid(task, cluster, p));
    } else {
      CHECK_THROWS_AS(make_placement(task, cluster, picked), Error);
    }
  }
}

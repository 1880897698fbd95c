#include <cmath>
#include <set>

#include <json.hpp>

#include "tiersim/sim.hpp"

namespace tiersim {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& origin, const std::string& what) {
  throw Error(Errc::ScenarioInvalid, origin.empty() ? what : origin + ": " + what);
}

void require_keys(const json& obj, std::initializer_list<const char*> known,
                  const std::string& ctx, const std::string& origin) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) invalid(origin, "unknown key '" + it.key() + "' in " + ctx);
  }
}

const json& field(const json& obj, const char* key, const std::string& ctx,
                  const std::string& origin) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(origin, ctx + " is missing key '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& ctx, const std::string& origin) {
  if (!v.is_number()) invalid(origin, ctx + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(origin, ctx + " must be finite");
  return d;
}

std::int64_t integer(const json& v, const std::string& ctx, const std::string& origin) {
  if (!v.is_number_integer()) invalid(origin, ctx + " must be an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& ctx, const std::string& origin) {
  if (!v.is_string()) invalid(origin, ctx + " must be a string");
  return v.get<std::string>();
}

SecuritySet security_set(const json& v, const std::string& ctx, const std::string& origin) {
  if (!v.is_array()) invalid(origin, ctx + " must be an array of tag names");
  SecuritySet tags;
  for (const json& entry : v) {
    const std::string name = text(entry, ctx + " entry", origin);
    const auto tag = security_tag_from_name(name);
    if (!tag) invalid(origin, ctx + ": unknown security tag '" + name + "'");
    tags.insert(*tag);
  }
  return tags;
}

TaskSpec parse_task_spec(const json& obj, const std::string& origin) {
  if (!obj.is_object()) invalid(origin, "task spec must be an object");
  require_keys(obj,
               {"task_id", "serial_work", "parallel_work", "per_node_overhead", "memory_mib",
                "cores_per_node", "security", "max_nodes", "state_size_bytes", "deadline_s"},
               "task spec", origin);
  TaskSpec spec;
  spec.task_id = text(field(obj, "task_id", "task spec", origin), "task_id", origin);
  const std::string ctx = "task '" + spec.task_id + "'";
  spec.serial_work = number(field(obj, "serial_work", ctx, origin), ctx + ".serial_work", origin);
  spec.parallel_work =
      number(field(obj, "parallel_work", ctx, origin), ctx + ".parallel_work", origin);
  spec.per_node_overhead_s =
      number(field(obj, "per_node_overhead", ctx, origin), ctx + ".per_node_overhead", origin);
  spec.memory_demand_mib =
      integer(field(obj, "memory_mib", ctx, origin), ctx + ".memory_mib", origin);
  spec.cores_per_node = static_cast<int>(
      integer(field(obj, "cores_per_node", ctx, origin), ctx + ".cores_per_node", origin));
  spec.required_security = security_set(field(obj, "security", ctx, origin), ctx + ".security", origin);
  spec.max_nodes =
      static_cast<int>(integer(field(obj, "max_nodes", ctx, origin), ctx + ".max_nodes", origin));
  spec.state_size_bytes =
      integer(field(obj, "state_size_bytes", ctx, origin), ctx + ".state_size_bytes", origin);
  if (obj.contains("deadline_s"))
    spec.deadline_s = number(obj.at("deadline_s"), ctx + ".deadline_s", origin);
  return spec;
}

ControllerConfig parse_controller(const json& obj, const std::string& origin) {
  require_keys(obj,
               {"hysteresis", "overload_utilization", "idle_utilization", "dwell_samples",
                "cooldown_factor"},
               "controller", origin);
  ControllerConfig config;
  if (obj.contains("hysteresis"))
    config.hysteresis = number(obj.at("hysteresis"), "controller.hysteresis", origin);
  if (obj.contains("overload_utilization"))
    config.overload_utilization =
        number(obj.at("overload_utilization"), "controller.overload_utilization", origin);
  if (obj.contains("idle_utilization"))
    config.idle_utilization =
        number(obj.at("idle_utilization"), "controller.idle_utilization", origin);
  if (obj.contains("dwell_samples"))
    config.dwell_samples =
        static_cast<int>(integer(obj.at("dwell_samples"), "controller.dwell_samples", origin));
  if (obj.contains("cooldown_factor"))
    config.cooldown_factor =
        number(obj.at("cooldown_factor"), "controller.cooldown_factor", origin);
  return config;
}

}  // namespace

Scenario parse_scenario(const std::string& contents, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(contents);
  } catch (const json::parse_error& e) {
    invalid(origin, std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) invalid(origin, "scenario must be a JSON object");
  require_keys(doc,
               {"nodes", "strategies", "tasks", "probe_hz", "seed", "controller_period",
                "power_models", "duration_s", "noise_watts", "controller"},
               "scenario", origin);

  Scenario scenario;
  scenario.probe_hz = number(field(doc, "probe_hz", "scenario", origin), "probe_hz", origin);
  const std::int64_t seed = integer(field(doc, "seed", "scenario", origin), "seed", origin);
  if (seed < 0) invalid(origin, "seed must be >= 0");
  scenario.seed = static_cast<std::uint64_t>(seed);
  scenario.controller_period_s =
      number(field(doc, "controller_period", "scenario", origin), "controller_period", origin);
  if (doc.contains("duration_s"))
    scenario.duration_s = number(doc.at("duration_s"), "duration_s", origin);
  if (doc.contains("noise_watts"))
    scenario.noise_watts = number(doc.at("noise_watts"), "noise_watts", origin);
  if (doc.contains("controller"))
    scenario.controller = parse_controller(doc.at("controller"), origin);

  std::map<std::string, PowerModel> power_models;
  const json& models = field(doc, "power_models", "scenario", origin);
  if (!models.is_object()) invalid(origin, "power_models must be an object");
  for (auto it = models.begin(); it != models.end(); ++it) {
    require_keys(*it, {"idle_watts", "per_core_watts", "cap_watts"},
                 "power model '" + it.key() + "'", origin);
    PowerModel pm;
    pm.idle_watts = number(field(*it, "idle_watts", it.key(), origin), "idle_watts", origin);
    pm.per_core_watts =
        number(field(*it, "per_core_watts", it.key(), origin), "per_core_watts", origin);
    pm.cap_watts = number(field(*it, "cap_watts", it.key(), origin), "cap_watts", origin);
    power_models.emplace(it.key(), pm);
  }

  const json& nodes = field(doc, "nodes", "scenario", origin);
  if (!nodes.is_array()) invalid(origin, "nodes must be an array");
  for (const json& entry : nodes) {
    if (!entry.is_object()) invalid(origin, "node entry must be an object");
    require_keys(entry,
                 {"node_id", "layer", "cores", "memory_mib", "security", "power_model",
                  "net_bandwidth_bps"},
                 "node entry", origin);
    NodeSpec node;
    node.node_id = text(field(entry, "node_id", "node entry", origin), "node_id", origin);
    const std::string ctx = "node '" + node.node_id + "'";
    const std::string layer = text(field(entry, "layer", ctx, origin), ctx + ".layer", origin);
    const auto parsed_layer = layer_from_name(layer);
    if (!parsed_layer) invalid(origin, ctx + ": unknown layer '" + layer + "'");
    node.layer = *parsed_layer;
    node.cores = static_cast<int>(integer(field(entry, "cores", ctx, origin), ctx + ".cores", origin));
    node.memory_mib = integer(field(entry, "memory_mib", ctx, origin), ctx + ".memory_mib", origin);
    node.security = security_set(field(entry, "security", ctx, origin), ctx + ".security", origin);
    const std::string model_name =
        text(field(entry, "power_model", ctx, origin), ctx + ".power_model", origin);
    const auto model = power_models.find(model_name);
    if (model == power_models.end())
      invalid(origin, ctx + ": power_model '" + model_name + "' is not in power_models");
    node.power_model = model->second;
    node.net_bandwidth_bps =
        integer(field(entry, "net_bandwidth_bps", ctx, origin), ctx + ".net_bandwidth_bps", origin);
    scenario.nodes.push_back(std::move(node));
  }

  const json& strategies = field(doc, "strategies", "scenario", origin);
  if (!strategies.is_object()) invalid(origin, "strategies must be an object");
  for (auto it = strategies.begin(); it != strategies.end(); ++it) {
    const auto layer = layer_from_name(it.key());
    if (!layer) invalid(origin, "strategies: unknown layer '" + it.key() + "'");
    const std::string name = text(*it, "strategies." + it.key(), origin);
    const auto strategy = strategy_from_name(name);
    if (!strategy) invalid(origin, "strategies: unknown strategy '" + name + "'");
    scenario.strategies.emplace(*layer, *strategy);
  }

  const json& tasks = field(doc, "tasks", "scenario", origin);
  if (!tasks.is_array()) invalid(origin, "tasks must be an array");
  for (const json& entry : tasks) {
    if (!entry.is_object()) invalid(origin, "task entry must be an object");
    require_keys(entry, {"arrival_s", "objective", "spec"}, "task entry", origin);
    ScenarioTask task;
    const double arrival = number(field(entry, "arrival_s", "task entry", origin), "arrival_s", origin);
    if (arrival < 0.0) invalid(origin, "arrival_s must be >= 0");
    task.arrival = seconds_to_micros(arrival);
    const std::string objective =
        text(field(entry, "objective", "task entry", origin), "objective", origin);
    const auto parsed = objective_from_name(objective);
    if (!parsed) invalid(origin, "unknown objective '" + objective + "'");
    task.objective = *parsed;
    task.spec = parse_task_spec(field(entry, "spec", "task entry", origin), origin);
    scenario.tasks.push_back(std::move(task));
  }

  try {
    scenario.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::ScenarioInvalid && origin.empty()) throw;
    invalid(origin, e.what());
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.string());
}

void Scenario::validate() const {
  if (!(probe_hz > 0.0) || !std::isfinite(probe_hz))
    throw Error(Errc::ScenarioInvalid, "probe_hz must be finite and > 0");
  if (1.0 / probe_hz > micros_to_seconds(kDefaultMaxGapUs))
    throw Error(Errc::ScenarioInvalid, "probe_hz too low: sample gaps would exceed max_gap");
  if (!(controller_period_s > 0.0) || !std::isfinite(controller_period_s))
    throw Error(Errc::ScenarioInvalid, "controller_period must be finite and > 0");
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
    throw Error(Errc::ScenarioInvalid, "duration_s must be finite and >= 0");
  if (!(noise_watts >= 0.0) || !std::isfinite(noise_watts))
    throw Error(Errc::ScenarioInvalid, "noise_watts must be finite and >= 0");
  if (!(controller.hysteresis >= 0.0) || !std::isfinite(controller.hysteresis))
    throw Error(Errc::ScenarioInvalid, "controller.hysteresis must be finite and >= 0");
  if (!(controller.overload_utilization > 0.0 && controller.overload_utilization <= 1.0))
    throw Error(Errc::ScenarioInvalid, "controller.overload_utilization must be in (0, 1]");
  if (!(controller.idle_utilization >= 0.0 &&
        controller.idle_utilization < controller.overload_utilization))
    throw Error(Errc::ScenarioInvalid,
                "controller.idle_utilization must be in [0, overload_utilization)");
  if (controller.dwell_samples < 1)
    throw Error(Errc::ScenarioInvalid, "controller.dwell_samples must be >= 1");
  if (!(controller.cooldown_factor >= 0.0) || !std::isfinite(controller.cooldown_factor))
    throw Error(Errc::ScenarioInvalid, "controller.cooldown_factor must be finite and >= 0");

  try {
    const ClusterState cluster = validate_cluster(nodes);
    for (Layer layer : kAllLayers) {
      if (!cluster.nodes_in_layer(layer).empty() && !strategies.contains(layer))
        throw Error(Errc::ScenarioInvalid,
                    std::string("layer '") + layer_name(layer) + "' has nodes but no strategy");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ScenarioInvalid) throw;
    throw Error(Errc::ScenarioInvalid, e.what());
  }

  std::set<std::string> task_ids;
  for (const ScenarioTask& task : tasks) {
    try {
      task.spec.validate();
    } catch (const Error& e) {
      throw Error(Errc::ScenarioInvalid, e.what());
    }
    if (task.arrival < 0) throw Error(Errc::ScenarioInvalid, "task arrival must be >= 0");
    if (!task_ids.insert(task.spec.task_id).second)
      throw Error(Errc::ScenarioInvalid, "duplicate task_id '" + task.spec.task_id + "'");
  }
}

}  // namespace tiersim

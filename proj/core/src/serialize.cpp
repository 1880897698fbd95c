#include <algorithm>

#include "tiersim/sim.hpp"

namespace tiersim {

namespace {

int final_width(const SimulationResult& result, const std::string& task_id) {
  // The last migration, if any, names the final placement; otherwise the
  // distinct window nodes are the placement the task finished on.
  for (auto it = result.migrations.rbegin(); it != result.migrations.rend(); ++it)
    if (it->task_id == task_id) return static_cast<int>(it->to.node_ids.size());
  std::vector<std::string> nodes;
  for (const ExecutionWindow& w : result.records.at(task_id).windows())
    nodes.push_back(w.node_id);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return static_cast<int>(nodes.size());
}

int migration_count(const SimulationResult& result, const std::string& task_id) {
  int count = 0;
  for (const MigrationRecord& m : result.migrations)
    if (m.task_id == task_id) ++count;
  return count;
}

std::string join(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ';';
    out += ids[i];
  }
  return out;
}

}  // namespace

std::string events_csv(const SimulationResult& result) { return events_csv(result.event_log); }

std::string traces_csv(const SimulationResult& result) { return power_csv(result.traces); }

std::string report_csv(const SimulationResult& result) {
  std::string out = "task_id,node_count,runtime_s,energy_j,energy_wh,objective,migrations\n";
  for (const auto& [task_id, report] : result.reports) {
    const auto makespan = result.makespans_s.find(task_id);
    const double runtime_s = makespan == result.makespans_s.end() ? 0.0 : makespan->second;
    out += task_id;
    out += ',';
    out += std::to_string(final_width(result, task_id));
    out += ',';
    out += format_decimal(runtime_s);
    out += ',';
    out += format_decimal(report.total_joules);
    out += ',';
    out += format_decimal(report.total_watt_hours());
    out += ',';
    out += objective_name(result.objectives.at(task_id));
    out += ',';
    out += std::to_string(migration_count(result, task_id));
    out += '\n';
  }
  return out;
}

std::string serialize(const SimulationResult& result) {
  std::string out = "# tiersim result v1\n";
  out += "# events\n";
  out += events_csv(result);
  out += "# traces\n";
  out += traces_csv(result);
  out += "# report\n";
  out += report_csv(result);
  out += "# makespans\n";
  for (const auto& [task_id, seconds] : result.makespans_s)
    out += task_id + "," + format_decimal(seconds) + "\n";
  out += "# work\n";
  for (const auto& [task_id, ledger] : result.work)
    out += task_id + "," + format_decimal(ledger.serial_done, 9) + "," +
           format_decimal(ledger.parallel_done, 9) + "\n";
  out += "# migrations\n";
  for (const MigrationRecord& m : result.migrations)
    out += m.task_id + "," + join(m.from.node_ids) + "," + join(m.to.node_ids) + "," +
           std::to_string(m.start) + "," + std::to_string(m.finish) + "," +
           format_decimal(m.estimated_gain, 9) + "," + format_decimal(m.transfer_seconds, 9) +
           "\n";
  out += "# end_time_us\n";
  out += std::to_string(result.end_time) + "\n";
  return out;
}

}  // namespace tiersim

#include "cli_commands.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <sstream>

#include "tiersim/sim.hpp"

namespace tiersim::cli {

namespace {

int exit_code_for(const Error& e) {
  return e.code() == Errc::IoError ? kExitIo : kExitInvalid;
}

struct WindowRow {
  std::string task_id;
  ExecutionWindow window;
};

std::vector<WindowRow> parse_windows_csv(const std::string& text, const std::string& origin) {
  constexpr const char* kHeader = "task_id,node_id,start_us,end_us";
  std::vector<WindowRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != kHeader)
        throw Error(Errc::ParseError,
                    origin + ":line 1: expected header '" + std::string(kHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 4)
      throw Error(Errc::ParseError,
                  origin + ":line " + std::to_string(line_no) + ": expected 4 fields");
    auto parse_us = [&](const std::string& field) {
      Micros value = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error(Errc::ParseError, origin + ":line " + std::to_string(line_no) +
                                          ": expected integer, got '" + field + "'");
      return value;
    };
    rows.push_back(WindowRow{fields[0],
                             ExecutionWindow{fields[1], parse_us(fields[2]), parse_us(fields[3])}});
  }
  return rows;
}

}  // namespace

int cmd_run(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
            std::ostream& err) {
  try {
    const Scenario scenario = load_scenario(scenario_path);
    const SimulationResult result = run(scenario);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + out_dir.string());
    write_text_file(out_dir / "events.csv", events_csv(result));
    write_text_file(out_dir / "traces.csv", traces_csv(result));
    write_text_file(out_dir / "report.csv", report_csv(result));
    return kExitOk;
  } catch (const Error& e) {
    err << "run: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_energy(const std::filesystem::path& trace_path,
               const std::filesystem::path& windows_path, double max_gap_s, std::ostream& out,
               std::ostream& err) {
  try {
    const auto traces = load_power_csv(trace_path);
    const auto rows = parse_windows_csv(read_text_file(windows_path), windows_path.string());
    const Micros max_gap = seconds_to_micros(max_gap_s);

    std::map<std::string, TaskRecord> records;
    for (const WindowRow& row : rows) {
      auto it = records.find(row.task_id);
      if (it == records.end()) {
        TaskSpec spec;
        spec.task_id = row.task_id;
        it = records.emplace(row.task_id, TaskRecord(std::move(spec))).first;
      }
      it->second.add_window(row.window);
    }

    out << "task_id,node_id,joules\n";
    for (const auto& [task_id, record] : records) {
      const EnergyReport report = task_energy(record, traces, max_gap);
      for (const auto& [node_id, joules] : report.per_node_joules)
        out << task_id << ',' << node_id << ',' << format_decimal(joules) << "\n";
      out << task_id << ",TOTAL," << format_decimal(report.total_joules) << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "energy: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_compare(const std::filesystem::path& scenario_path, const std::vector<int>& node_counts,
                const std::optional<std::filesystem::path>& out_path, std::ostream& out,
                std::ostream& err) {
  try {
    const Scenario base = load_scenario(scenario_path);
    const int fog_nodes = static_cast<int>(
        std::count_if(base.nodes.begin(), base.nodes.end(),
                      [](const NodeSpec& n) { return n.layer == Layer::Fog; }));
    for (int count : node_counts) {
      if (count < 1 || count > fog_nodes) {
        err << "compare: node count " << count << " out of range 1.." << fog_nodes << "\n";
        return kExitInvalid;
      }
    }

    std::string csv = "n,runtime_s,energy_j\n";
    for (int count : node_counts) {
      Scenario scenario = base;
      for (ScenarioTask& task : scenario.tasks) task.spec.max_nodes = count;
      const SimulationResult result = run(scenario);

      std::vector<TaskRecord> records;
      for (const auto& [task_id, record] : result.records) records.push_back(record);
      const double runtime_s = makespan_seconds(records);
      csv += std::to_string(count) + "," + format_decimal(runtime_s) + "," +
             format_decimal(total_cluster_energy(result)) + "\n";
    }
    if (out_path)
      write_text_file(*out_path, csv);
    else
      out << csv;
    return kExitOk;
  } catch (const Error& e) {
    err << "compare: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace tiersim::cli

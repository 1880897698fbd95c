#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tiersim::cli {

// Exit codes shared by every subcommand: 0 success, 1 invalid input
// (scenario, counts, windows), 2 I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

// Runs a scenario and writes events.csv, traces.csv and report.csv into
// out_dir (created if missing).
int cmd_run(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
            std::ostream& err);

// Integrates measured power traces over per-task execution windows. The
// window CSV has header `task_id,node_id,start_us,end_us`. Prints
// `task_id,node_id,joules` rows plus a TOTAL row per task.
int cmd_energy(const std::filesystem::path& trace_path,
               const std::filesystem::path& windows_path, double max_gap_s, std::ostream& out,
               std::ostream& err);

// Sweeps the scenario over fog node counts (pinning every task's max_nodes)
// and emits `n,runtime_s,energy_j` rows; energy is the whole-cluster total.
int cmd_compare(const std::filesystem::path& scenario_path, const std::vector<int>& node_counts,
                const std::optional<std::filesystem::path>& out_path, std::ostream& out,
                std::ostream& err);

}  // namespace tiersim::cli

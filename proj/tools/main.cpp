#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tiersim: deterministic edge/fog/cloud orchestration simulator with energy accounting"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  CLI::App* run = app.add_subcommand("run", "run a scenario and write events/traces/report CSVs");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  std::string trace_path;
  std::string windows_path;
  double max_gap_s = 5.0;
  CLI::App* energy =
      app.add_subcommand("energy", "integrate a measured power trace over task windows");
  energy->add_option("trace", trace_path, "power trace CSV")->required();
  energy->add_option("--windows", windows_path, "task windows CSV")->required();
  energy->add_option("--max-gap-s", max_gap_s, "largest sample gap tolerated inside a window");

  std::string compare_scenario;
  std::vector<int> node_counts;
  std::string compare_out;
  CLI::App* compare =
      app.add_subcommand("compare", "sweep fog node counts and emit runtime/energy rows");
  compare->add_option("scenario", compare_scenario, "scenario JSON file")->required();
  compare->add_option("--nodes", node_counts, "node counts, e.g. 1,2,3")
      ->required()
      ->delimiter(',');
  compare->add_option("--out", compare_out, "output CSV file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return tiersim::cli::cmd_run(scenario_path, out_dir, std::cerr);
  if (energy->parsed())
    return tiersim::cli::cmd_energy(trace_path, windows_path, max_gap_s, std::cout, std::cerr);
  if (compare->parsed()) {
    std::optional<std::filesystem::path> out;
    if (!compare_out.empty()) out = compare_out;
    return tiersim::cli::cmd_compare(compare_scenario, node_counts, out, std::cout, std::cerr);
  }
  return tiersim::cli::kExitInvalid;
}

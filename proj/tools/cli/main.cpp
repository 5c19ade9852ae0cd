// Headless scenario runner.
//
//   morphflow run <scenario.json> --out <dir> [--ticks N] [--hash-only]
//   morphflow validate <scenario.json>
//   morphflow export-graph <scenario.json> --at-tick T --format dot|json
//
// Exit codes: 0 ok, 1 scenario error, 2 runtime error.

#include <iostream>

#include <CLI11.hpp>

#include "morphflow/graph_export.hpp"
#include "morphflow/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kScenarioError = 1;
constexpr int kRuntimeError = 2;

std::optional<morphflow::Scenario> load(const std::string& path) {
  try {
    return morphflow::load_scenario(path);
  } catch (const morphflow::Error& e) {
    std::cerr << "morphflow: " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> ticks, bool hash_only) {
  auto scenario = load(path);
  if (!scenario) return kScenarioError;
  try {
    const auto summary = morphflow::run_scenario(*scenario, {out, ticks, hash_only});
    std::cout << "ran " << summary.manifest["ticks"] << " ticks, " << summary.snapshots << " graph snapshot(s); manifest "
              << (std::filesystem::path(out) / "manifest.json").string() << "\n";
    return kOk;
  } catch (const morphflow::Error& e) {
    std::cerr << "morphflow: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_validate(const std::string& path) {
  auto scenario = load(path);
  if (!scenario) return kScenarioError;
  std::cout << path << ": ok (" << scenario->templates.size() << " template(s), " << scenario->schedule.size()
            << " scheduled edit(s), " << scenario->control_script.size() << " control event(s), " << scenario->ticks
            << " ticks)\n";
  return kOk;
}

int cmd_export(const std::string& path, std::uint64_t at_tick, const std::string& format) {
  auto scenario = load(path);
  if (!scenario) return kScenarioError;
  try {
    morphflow::ScenarioRuntime runtime(*scenario);
    for (std::uint64_t i = 0; i < at_tick; ++i) {
      const auto r = runtime.step();
      if (!r.failed.empty()) throw morphflow::Error(r.failed.front().code, r.failed.front().message);
    }
    const auto& st = runtime.state();
    if (format == "json") {
      std::cout << morphflow::to_json(st.program, &st.names).dump(2) << "\n";
    } else {
      if (!st.program.main_graph()) throw morphflow::Error(morphflow::Errc::precondition, "program has no main graph");
      std::cout << morphflow::to_dot(st.program, *st.program.main_graph(), &st.names);
    }
    return kOk;
  } catch (const morphflow::Error& e) {
    std::cerr << "morphflow: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run, check, and inspect morphflow scenarios"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> ticks;
  bool hash_only = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write frames, graph snapshots, and a manifest");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--ticks", ticks, "Override the scenario's tick budget");
  run->add_flag("--hash-only", hash_only, "Write only manifest.json");

  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  std::uint64_t at_tick = 0;
  std::string format = "json";
  auto* exp = app.add_subcommand("export-graph", "Print the program graph after a number of ticks");
  exp->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  exp->add_option("--at-tick", at_tick, "Ticks to run before exporting")->required();
  exp->add_option("--format", format, "Output format")->check(CLI::IsMember({"dot", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kScenarioError;
  }

  if (*run) return cmd_run(scenario_path, out_dir, ticks, hash_only);
  if (*validate) return cmd_validate(scenario_path);
  return cmd_export(scenario_path, at_tick, format);
}

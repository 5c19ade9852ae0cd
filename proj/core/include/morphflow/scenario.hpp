#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphflow/edit_command.hpp"
#include "morphflow/engine.hpp"

namespace morphflow {

struct VertexDef {
  std::string name;
  nlohmann::json data;
  std::vector<std::string> sources;
};

struct GraphDef {
  std::string name;
  std::vector<VertexDef> vertices;
  std::vector<GraphDef> subgraphs;
};

struct ScheduledEdit {
  Tick tick = 0;
  EditCommand command;
};

struct ScheduledControl {
  Tick tick = 0;
  ControlEvent event;
};

struct OutputSpec {
  std::string vertex;
  /// PGM frames are written every `every` ticks; hashes are recorded every tick.
  std::uint64_t every = 1;
};

/// A reproducible run: initial top-level graphs, edit schedule, control
/// script, and outputs. Within one tick boundary edits are applied before
/// control events, each list in file order.
struct Scenario {
  std::uint64_t seed = 0;
  int width = 128;
  int height = 128;
  std::uint64_t ticks = 400;
  std::vector<GraphDef> templates;
  std::optional<std::string> main;
  std::vector<ScheduledEdit> schedule;
  std::vector<ScheduledControl> control_script;
  std::vector<OutputSpec> outputs;
};

/// Checks the schema, every name reference (following the names that edits
/// introduce over time), and tick ranges. Throws Error(scenario) with the
/// offending field path in the message.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);

/// Builds vertex data from its scenario description at the given grid size.
/// `graphs` resolves graph_ref targets.
VertexData vertex_data_from_json(const nlohmann::json& doc, int width, int height,
                                 const std::map<std::string, GraphId>& graphs);

/// Builds the initial program, labels, and schedule.
EngineState instantiate(const Scenario& scenario);

/// Steps a scenario one tick at a time, registering outputs as soon as their
/// labels exist and recording the run trace plus every applied queue item.
class ScenarioRuntime {
 public:
  explicit ScenarioRuntime(Scenario scenario);

  TickResult step();

  EngineState& state() noexcept { return state_; }
  const EngineState& state() const noexcept { return state_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  const RunTrace& trace() const noexcept { return trace_; }
  std::uint64_t ticks_run() const noexcept { return trace_.ticks.size(); }

  nlohmann::json manifest(bool complete = true) const;

  /// The scenario with `ticks` set to the ticks run so far and the schedule
  /// and control script replaced by the items actually applied. Running it
  /// reproduces this runtime's manifest.
  nlohmann::json applied_log() const;

  /// Output label for a registered vertex, if it came from the scenario.
  std::optional<std::string> output_label(VertexId v) const;
  std::uint64_t output_every(VertexId v) const;

 private:
  void resolve_outputs();

  Scenario scenario_;
  EngineState state_;
  RunTrace trace_;
  std::vector<bool> output_resolved_;
  std::map<VertexId, std::size_t> output_spec_of_;
  std::vector<ScheduledEdit> applied_edits_;
  std::vector<ScheduledControl> applied_controls_;
};

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> ticks;
  bool hash_only = false;
};

struct RunSummary {
  nlohmann::json manifest;
  std::size_t snapshots = 0;
};

/// Runs the scenario and writes frames/<label>_t<tick>.pgm, graphs/tick_<t>.{json,dot}
/// at each structural edit, and manifest.json. With hash_only only the
/// manifest is written. On an engine failure the manifest is written with
/// "complete": false and the error is rethrown.
RunSummary run_scenario(const Scenario& scenario, const RunOptions& options);

}  // namespace morphflow

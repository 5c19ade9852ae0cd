#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphflow/edit_command.hpp"
#include "morphflow/editor.hpp"
#include "morphflow/error.hpp"
#include "morphflow/image_frame.hpp"
#include "morphflow/names.hpp"
#include "morphflow/program.hpp"

namespace morphflow {

/// A parameter change coming from a human (or a scripted stand-in): a click on
/// a wave's drawing field, or a new numeric control value.
struct ControlEvent {
  VertexSelector vertex;
  std::variant<PixelCoord, double> change;

  friend bool operator==(const ControlEvent&, const ControlEvent&) = default;
};

nlohmann::json to_json(const ControlEvent& event);
/// Accepts {"vertex": sel, "click": [x, y]} or {"vertex": sel, "value": v}.
ControlEvent control_event_from_json(const nlohmann::json& doc);

using QueueItem = std::variant<EditCommand, ControlEvent>;

/// Identifies who submitted a queued item; 0 is the scenario schedule.
using Origin = std::uint64_t;

struct QueuedItem {
  Tick tick = 0;
  std::uint64_t seq = 0;
  Origin origin = 0;
  QueueItem item;
};

/// Bounded ring of recent (tick, vertex, frame hash) records.
class FrameLog {
 public:
  struct Entry {
    Tick tick;
    VertexId vertex;
    std::uint64_t hash;
  };

  explicit FrameLog(std::size_t capacity) : capacity_(capacity) {}

  void record(Entry entry);
  const std::deque<Entry>& entries() const noexcept { return entries_; }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::deque<Entry> entries_;
};

/// What a control event changed, for ControlState broadcasts.
struct ControlChange {
  VertexId addressed;
  std::optional<double> value;
  std::optional<ClickControl> click;
};

struct AppliedItem {
  Tick tick = 0;
  Origin origin = 0;
  QueueItem item;
  UndoRecord undo;
  std::optional<ControlChange> control;
};

struct FailedItem {
  Tick tick = 0;
  Origin origin = 0;
  QueueItem item;
  Errc code = Errc::precondition;
  std::string message;
};

struct Emission {
  VertexId vertex;
  ImageFrame frame;
};

struct TickResult {
  /// Clock value the work cycle ran at.
  Tick tick = 0;
  /// Registered outputs as drawn at the start of the tick.
  std::vector<Emission> emissions;
  /// Queue items drained at the boundary closing this tick, in application order.
  std::vector<AppliedItem> applied;
  std::vector<FailedItem> failed;
  /// True when a structural edit fired at this boundary.
  bool structure_changed = false;
};

/// The running program plus everything the work cycle needs around it.
struct EngineState {
  explicit EngineState(DataflowProgram p) : program(std::move(p)) {}

  DataflowProgram program;
  std::vector<VertexId> outputs;
  NameTable names;
  std::vector<AlphaRamp> ramps;
  std::optional<FrameLog> frame_log;

  /// Queue items sorted by (tick, edits before controls, submission order).
  const std::vector<QueuedItem>& queue() const noexcept { return queue_; }

  /// Throws Error(invalid_argument) for ticks already in the past.
  void schedule(Tick tick, QueueItem item, Origin origin = 0);

 private:
  std::vector<QueuedItem> queue_;
  std::uint64_t next_seq_ = 0;

  friend TickResult tick(EngineState& state);
};

/// Registers `vertex` as an output; idempotent. Requires an image stream.
void register_output(EngineState& state, VertexId vertex);

/// Applies one edit immediately, keeping outputs, ramps, and labels in step
/// with the structural change. Atomic: on error nothing changes.
UndoRecord apply_edit(EngineState& state, const EditCommand& cmd);

/// Applies a control event immediately. A click sets the center and restarts
/// the wave at the current clock.
ControlChange apply_control(EngineState& state, const ControlEvent& event);

/// One work cycle at clock value c:
///   1. draw every registered output from the current source buffers;
///   2. apply every transform in F(main), reading source buffers and writing
///      target buffers; samplers draw; graph views re-layout and render;
///   3. swap target buffers into source position;
/// then the clock becomes c + 1 and the boundary closing tick c is processed:
/// running ramps advance, and edits then controls scheduled at c are applied.
/// Throws Error(validation) without changing anything if the program is
/// malformed. Failing queue items are reported, not thrown.
TickResult tick(EngineState& state);

struct TickHashes {
  Tick tick = 0;
  std::vector<std::pair<VertexId, std::uint64_t>> outputs;
};

struct GraphSnapshot {
  Tick tick = 0;
  nlohmann::json graph;
};

struct RunTrace {
  std::vector<TickHashes> ticks;
  std::vector<GraphSnapshot> snapshots;

  /// Records frame hashes, and a graph snapshot if the structure changed.
  void append(const TickResult& result, const EngineState& state);
};

/// Calls tick() n times. Throws Error(precondition) on the first failed queue item.
RunTrace run(EngineState& state, std::uint64_t n_ticks);

struct ManifestInfo {
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  bool complete = true;
};

/// {
///   "format": "morphflow-manifest/1", "complete": bool, "seed": S,
///   "width": W, "height": H, "ticks": N,
///   "frames": [{"tick": t, "outputs": [{"vertex": id, "hash": "<16 hex>"}]}],
///   "snapshots": [{"tick": t, "graph": <graph document>}]
/// }
nlohmann::json manifest_json(const RunTrace& trace, const ManifestInfo& info);

}  // namespace morphflow

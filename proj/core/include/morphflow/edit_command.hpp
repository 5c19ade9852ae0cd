#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "morphflow/ids.hpp"
#include "morphflow/names.hpp"

namespace morphflow {

/// A vertex named either by raw id or by label.
struct VertexSelector {
  std::variant<VertexId, std::string> ref;

  VertexSelector() = default;
  VertexSelector(VertexId id) : ref(id) {}
  VertexSelector(std::string name) : ref(std::move(name)) {}
  VertexSelector(const char* name) : ref(std::string(name)) {}

  friend bool operator==(const VertexSelector&, const VertexSelector&) = default;
};

struct GraphSelector {
  std::variant<GraphId, std::string> ref;

  GraphSelector() = default;
  GraphSelector(GraphId id) : ref(id) {}
  GraphSelector(std::string name) : ref(std::move(name)) {}
  GraphSelector(const char* name) : ref(std::string(name)) {}

  friend bool operator==(const GraphSelector&, const GraphSelector&) = default;
};

/// Throws Error(unknown_vertex / unknown_graph) for unbound labels. Raw ids are
/// returned unchecked.
VertexId resolve(const VertexSelector& sel, const NameTable& names);
GraphId resolve(const GraphSelector& sel, const NameTable& names);

namespace edit {

struct NodeSplit {
  VertexSelector target;
  std::optional<std::string> upstream_name;
  friend bool operator==(const NodeSplit&, const NodeSplit&) = default;
};
struct AddZeroWeightSource {
  VertexSelector identity_vertex;
  VertexSelector side_vertex;
  friend bool operator==(const AddZeroWeightSource&, const AddZeroWeightSource&) = default;
};
struct RemoveZeroWeightSource {
  VertexSelector identity_vertex;
  friend bool operator==(const RemoveZeroWeightSource&, const RemoveZeroWeightSource&) = default;
};
struct SInsert {
  VertexSelector target_vertex;
  VertexSelector side_vertex;
  std::optional<std::string> new_vertex_name;
  friend bool operator==(const SInsert&, const SInsert&) = default;
};
struct LimitedDeepCopy {
  GraphSelector graph;
  /// nullopt: the copy becomes a top-level graph.
  std::optional<GraphSelector> destination;
  /// Label of the copy; copied vertices are labeled "<name>/<original label>".
  std::optional<std::string> name;
  friend bool operator==(const LimitedDeepCopy&, const LimitedDeepCopy&) = default;
};
struct SetAlpha {
  VertexSelector vertex;
  double value = 0.0;
  friend bool operator==(const SetAlpha&, const SetAlpha&) = default;
};
struct RampAlpha {
  VertexSelector vertex;
  double from = 0.0;
  double to = 0.0;
  std::uint64_t duration_ticks = 1;
  friend bool operator==(const RampAlpha&, const RampAlpha&) = default;
};
struct MergeIdentity {
  VertexSelector identity_vertex;
  friend bool operator==(const MergeIdentity&, const MergeIdentity&) = default;
};
struct SRemove {
  VertexSelector target_vertex;
  friend bool operator==(const SRemove&, const SRemove&) = default;
};
struct RemoveSubgraph {
  GraphSelector graph;
  friend bool operator==(const RemoveSubgraph&, const RemoveSubgraph&) = default;
};

}  // namespace edit

using EditCommand = std::variant<edit::NodeSplit, edit::AddZeroWeightSource, edit::RemoveZeroWeightSource,
                                 edit::SInsert, edit::LimitedDeepCopy, edit::SetAlpha, edit::RampAlpha,
                                 edit::MergeIdentity, edit::SRemove, edit::RemoveSubgraph>;

/// The wire/scenario name in the "op" field.
std::string_view op_name(const EditCommand& cmd) noexcept;

/// Structural edits change the graph; SetAlpha and RampAlpha only move
/// coefficients.
bool is_structural(const EditCommand& cmd) noexcept;

/// {"op": "<name>", <named arguments>}. Selectors encode as integers (ids)
/// or strings (labels); a top-level copy destination is null or absent.
nlohmann::json to_json(const EditCommand& cmd);

/// Throws Error(scenario) naming the offending field.
EditCommand edit_command_from_json(const nlohmann::json& doc);

/// Undo information for one applied edit.
struct UndoRecord {
  std::optional<EditCommand> inverse;
  Tick tick_applied = 0;
};

}  // namespace morphflow

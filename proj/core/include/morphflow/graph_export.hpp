#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "morphflow/names.hpp"
#include "morphflow/program.hpp"

namespace morphflow {

/// JSON description of one vertex's data: {"kind": ..., <variant fields>}.
/// Image buffers are summarized by their dimensions and frame hash.
nlohmann::json vertex_data_json(const VertexData& data);

/// Whole-program document:
/// {
///   "format": "morphflow-graph/1",
///   "clock": T, "rng_seed": S, "main_graph": id | null,
///   "top_level_graphs": [id...],
///   "graphs":   [{"id", "name"?, "parent": id|null, "immediate_targets": [...], "immediate_subgraphs": [...]}],
///   "vertices": [{"id", "name"?, "parent", "sources": [...], "data": {...}}]
/// }
/// Entries are ordered by id.
nlohmann::json to_json(const DataflowProgram& program, const NameTable* names = nullptr);

/// Graphviz digraph of F(graph): one node per vertex labeled with its data
/// variant (and alpha for sums), one edge per source reference. Sources that
/// live outside the graph are drawn dashed.
std::string to_dot(const DataflowProgram& program, GraphId graph, const NameTable* names = nullptr);

}  // namespace morphflow

#pragma once

#include <map>
#include <optional>
#include <string>

#include "morphflow/program.hpp"

namespace morphflow {

/// Structural signature of vertex data: variant, transform and its parameters,
/// control values, constant-frame hash. Live buffers and layouts are state,
/// not structure, and are left out.
std::string data_signature(const VertexData& data);

struct IsomorphismResult {
  bool isomorphic = false;
  std::string mismatch;
  std::map<VertexId, VertexId> vertex_map;
  std::map<GraphId, GraphId> graph_map;
};

/// Order-preserving structural isomorphism. Both programs are walked in
/// canonical order (top-level graphs in order; within a graph its targets,
/// then its subgraphs); the i-th vertex/graph of one is paired with the i-th
/// of the other, and the pairing must carry hierarchy, source lists, main
/// graph, graph references and data signatures onto each other. Ids play no
/// part, so programs differing only by fresh ids compare equal.
IsomorphismResult structurally_isomorphic(const DataflowProgram& a, const DataflowProgram& b);

}  // namespace morphflow

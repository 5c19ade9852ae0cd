#pragma once

#include <cstddef>
#include <vector>

#include "morphflow/program.hpp"

namespace morphflow {

/// Stream/transform view of a graph: each vertex is a stream node, and each
/// vertex whose data carries a transform (dynamic images, samplers, graph
/// views) also contributes the transform node that produces its stream.
struct BipartiteView {
  enum class NodeKind { stream, transform };

  struct NodeRef {
    NodeKind kind;
    std::size_t index;
    friend bool operator==(const NodeRef&, const NodeRef&) = default;
  };

  struct StreamNode {
    VertexId vertex;
    /// Sources outside the flattened graph appear as external stream nodes.
    bool external = false;
  };

  struct TransformNode {
    VertexId produces;
  };

  struct Edge {
    NodeRef from;
    NodeRef to;
  };

  std::vector<StreamNode> stream_nodes;
  std::vector<TransformNode> transform_nodes;
  std::vector<Edge> edges;
};

bool is_transform_bearing(const VertexData& data) noexcept;

BipartiteView to_bipartite_view(const DataflowProgram& program, GraphId graph);

}  // namespace morphflow

#pragma once

#include "morphflow/program.hpp"
#include "morphflow/vertex_data.hpp"

namespace morphflow {

struct LayoutParams {
  /// Largest distance any vertex may move in one step.
  double step_bound = 0.01;
  /// Margin kept free around the unit square.
  double margin = 0.06;
  /// Gain from net force to displacement before clipping.
  double gain = 0.02;
};

/// Deterministic entry position for a vertex not seen before.
Point2 initial_position(VertexId id, const LayoutParams& params = {});

/// One force-directed step over F(graph), seeded from `prev`: repulsion
/// between all pairs, spring attraction along source edges, weak pull to the
/// center. Vertices that left the graph are dropped, new ones enter at
/// initial_position(). Each displacement is clipped to params.step_bound.
LayoutState layout_incremental(const DataflowProgram& program, GraphId graph, const LayoutState& prev,
                               const LayoutParams& params = {});

}  // namespace morphflow

#pragma once

#include <cstdint>
#include <optional>

#include "morphflow/program.hpp"

namespace morphflow {

// Benign discontinuities, their inverses, and coefficient changes.
//
// Every operation checks all of its preconditions before touching the program,
// so a throwing call leaves the program unchanged. Vertices created by an edit
// start in the state they would have had if the new structure had been in
// place all along: a fresh pass-through vertex shows the value its upstream
// showed one tick earlier.

struct SplitResult {
  /// Holds the split vertex's data and sources.
  VertexId upstream;
  /// Identity(upstream); took over the split vertex's consumers.
  VertexId identity;
};

/// Replaces image vertex `a` by upstream -> identity. a's id is retired.
SplitResult node_split(DataflowProgram& program, VertexId a);

/// Turns Identity(b) at `c` into SumOf2(b, d) with alpha 0.
void add_zero_weight_source(DataflowProgram& program, VertexId c, VertexId d);

/// Inverse of add_zero_weight_source: SumOf2(b, d) with alpha exactly 0 and no
/// control source becomes Identity(b).
void remove_zero_weight_source(DataflowProgram& program, VertexId c);

/// Moves `target`'s data and sources onto a fresh upstream vertex and makes
/// `target` the sum of that vertex (weight 1) and `side` (weight 0). Returns
/// the fresh vertex.
VertexId s_insert(DataflowProgram& program, VertexId target, VertexId side);

/// Where a limited deep copy is attached: nullopt for a new top-level graph,
/// otherwise the parent graph.
using CopyDestination = std::optional<GraphId>;

/// Three-step limited deep copy; see editor.cpp for the protocol.
GraphId limited_deep_copy(DataflowProgram& program, GraphId graph, CopyDestination destination);

/// Inverse of node_split: c = Identity(b) where c is b's only consumer. b
/// takes over c's consumers and c is retired. Returns b.
VertexId merge_identity(DataflowProgram& program, VertexId c);

struct SRemoveResult {
  /// The vertex that held target's original data; now retired.
  VertexId retired;
  /// The dropped zero-weight side source.
  VertexId side;
};

/// Inverse of s_insert. Requires alpha exactly 0 and the upstream vertex to
/// feed only `target`.
SRemoveResult s_remove(DataflowProgram& program, VertexId target);

/// Deletes g with all its vertices and subgraphs. Refused while anything
/// outside F(g) still refers into it.
void remove_subgraph(DataflowProgram& program, GraphId graph);

/// Current effective alpha of a SumOf2 vertex: the value of its NumericControl
/// source when one is wired in, the stored alpha otherwise.
double effective_alpha(const DataflowProgram& program, VertexId v);

/// Sets the effective alpha (the control source's value if present, and the
/// stored alpha in any case). Requires a SumOf2 vertex and value in [0, 1].
void set_alpha(DataflowProgram& program, VertexId v, double value);

/// Linear alpha schedule: step k in [0, duration] yields
/// from + (to - from) * k / duration, and exactly `to` at k == duration.
struct AlphaRamp {
  VertexId vertex;
  double from = 0.0;
  double to = 0.0;
  std::uint64_t duration_ticks = 1;
  std::uint64_t step = 0;

  double value_at(std::uint64_t k) const noexcept;
  bool finished() const noexcept { return step >= duration_ticks; }
};

/// Checks ramp arguments against the vertex; throws like set_alpha.
AlphaRamp make_ramp(const DataflowProgram& program, VertexId v, double from, double to,
                    std::uint64_t duration_ticks);

/// Explicit opt-in for non-benign edits kept only for comparison experiments.
enum class UnsafeEdits { allow };

/// Abruptly re-points source slot `index` of `v` to `new_source`. The result
/// still validates, but the switch is a behavioral jump.
void rewire_source_unsafe(DataflowProgram& program, VertexId v, std::size_t index, VertexId new_source,
                          UnsafeEdits);

}  // namespace morphflow

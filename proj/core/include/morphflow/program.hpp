#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphflow/ids.hpp"
#include "morphflow/rng.hpp"
#include "morphflow/vertex_data.hpp"

namespace morphflow {

struct DataflowVertex {
  std::vector<VertexId> sources;
  VertexData data;
  GraphId parent;
  /// Scratch link used only while a limited deep copy is in progress.
  std::optional<VertexId> forward_ref;
};

struct DataflowGraph {
  std::vector<VertexId> immediate_targets;
  std::vector<GraphId> immediate_subgraphs;
  std::optional<GraphId> parent;
};

/// A mutable collection of graphs and vertices plus the global clock and the
/// program-wide generator.
///
/// The checked mutators below keep every structural invariant. The raw tables
/// are exposed for the editor and for tests that need to build corrupted
/// programs on purpose; anything written through them should be checked with
/// validate().
class DataflowProgram {
 public:
  explicit DataflowProgram(std::uint64_t seed = 0);

  /// New parentless graph. make_main on a program that already has a main
  /// graph throws unless replace_main is set.
  GraphId add_top_level_graph(bool make_main = false, bool replace_main = false);
  GraphId add_subgraph(GraphId parent);

  /// Appends a vertex to `graph`. All sources must already exist.
  VertexId add_vertex(GraphId graph, VertexData data, std::vector<VertexId> sources = {});

  /// Replaces the source list; used to close loops after construction.
  void set_sources(VertexId vertex, std::vector<VertexId> sources);

  bool contains(VertexId id) const { return vertices_.contains(id); }
  bool contains(GraphId id) const { return graphs_.contains(id); }

  const DataflowVertex& vertex(VertexId id) const;
  DataflowVertex& vertex(VertexId id);
  const DataflowGraph& graph(GraphId id) const;
  DataflowGraph& graph(GraphId id);

  const std::vector<GraphId>& top_level_graphs() const noexcept { return top_level_; }
  std::optional<GraphId> main_graph() const noexcept { return main_; }
  void set_main_graph(std::optional<GraphId> id);

  Tick clock() const noexcept { return clock_; }
  void advance_clock() noexcept { ++clock_; }

  std::uint64_t rng_seed() const noexcept { return seed_; }
  Rng& rng() noexcept { return rng_; }
  const Rng& rng() const noexcept { return rng_; }

  const std::map<VertexId, DataflowVertex>& vertices() const noexcept { return vertices_; }
  const std::map<GraphId, DataflowGraph>& graphs() const noexcept { return graphs_; }

  std::map<VertexId, DataflowVertex>& vertex_table() noexcept { return vertices_; }
  std::map<GraphId, DataflowGraph>& graph_table() noexcept { return graphs_; }
  std::vector<GraphId>& top_level_table() noexcept { return top_level_; }

  VertexId allocate_vertex_id() noexcept { return VertexId{next_vertex_++}; }
  GraphId allocate_graph_id() noexcept { return GraphId{next_graph_++}; }

 private:
  std::map<VertexId, DataflowVertex> vertices_;
  std::map<GraphId, DataflowGraph> graphs_;
  std::vector<GraphId> top_level_;
  std::optional<GraphId> main_;
  Tick clock_ = 0;
  std::uint64_t seed_;
  Rng rng_;
  std::uint64_t next_vertex_ = 1;
  std::uint64_t next_graph_ = 1;
};

inline DataflowProgram create_program(std::uint64_t seed) { return DataflowProgram(seed); }

/// F(G): immediate targets of G followed by the flattening of each immediate
/// subgraph, in list order, without duplicates.
std::vector<VertexId> flatten(const DataflowProgram& program, GraphId graph);

/// Graph ids of G and all of its descendants, preorder.
std::vector<GraphId> graph_subtree(const DataflowProgram& program, GraphId graph);

/// F(P): union of flatten over the top-level graphs, in top-level order.
std::vector<VertexId> program_vertices(const DataflowProgram& program);

/// Vertices whose source list mentions `vertex` (each consumer once).
std::vector<VertexId> consumers_of(const DataflowProgram& program, VertexId vertex);

struct Violation {
  std::string rule;
  std::string id;
  std::string detail;
};

/// Every structural and data invariant of the program. Empty iff the program
/// is well formed.
std::vector<Violation> validate(const DataflowProgram& program);

}  // namespace morphflow

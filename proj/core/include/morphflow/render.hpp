#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphflow/image_frame.hpp"
#include "morphflow/program.hpp"
#include "morphflow/vertex_data.hpp"

namespace morphflow {

enum class GlyphKind { node, self_placeholder };

struct NodeGlyph {
  GlyphKind kind = GlyphKind::node;
  VertexId vertex;
  std::string variant;
  Point2 position;
  double fill = 0.0;
};

struct EdgeStroke {
  VertexId from;
  VertexId to;
  Point2 from_position;
  Point2 to_position;
  /// The source lives outside the rendered graph; the stroke starts at a stub.
  bool external = false;
};

struct DrawList {
  std::vector<NodeGlyph> nodes;
  std::vector<EdgeStroke> edges;
};

struct Rendering {
  ImageFrame raster;
  DrawList draw_list;
};

inline constexpr double kBackgroundLevel = -1.0;
inline constexpr double kEdgeLevel = -0.35;
inline constexpr double kArrowLevel = 0.15;
inline constexpr double kSelfPlaceholderLevel = 1.0;

/// Glyph fill level for each data variant; all distinct.
double glyph_fill(const VertexData& data) noexcept;

/// Draws F(graph) with the positions in `layout`: one glyph per vertex, one
/// stroke per source reference (with an arrow mark near the consumer end).
/// A GraphRef naming `graph` itself is drawn as the self-reference
/// placeholder; referenced graphs are never rendered recursively.
/// Vertices missing from the layout are placed at initial_position().
Rendering render_graph(const DataflowProgram& program, GraphId graph, const LayoutState& layout, int width,
                       int height);

/// {"nodes": [{"kind", "vertex", "variant", "x", "y"}], "edges": [{"from", "to", "x0", "y0", "x1", "y1", "external"}]}
nlohmann::json to_json(const DrawList& list);

/// Adds a GraphRef vertex to `parent` showing `graph`. A vertex showing the
/// graph it belongs to is allowed.
VertexId make_graph_ref_vertex(DataflowProgram& program, GraphId graph, GraphId parent, int width, int height);

}  // namespace morphflow

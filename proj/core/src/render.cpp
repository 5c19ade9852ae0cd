#include "morphflow/render.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "morphflow/error.hpp"
#include "morphflow/layout.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;

double glyph_fill(const VertexData& data) noexcept {
  return std::visit(overloaded{
                        [](const ConstantImage&) { return -0.8; },
                        [](const DynamicImage&) { return 0.6; },
                        [](const Sampler&) { return -0.6; },
                        [](const SignedSampler&) { return -0.5; },
                        [](const NumericControl&) { return 0.35; },
                        [](const ClickControl&) { return 0.45; },
                        [](const Clock&) { return 0.75; },
                        [](const GraphRef&) { return 0.9; },
                    },
                    data);
}

namespace {

struct Canvas {
  ImageFrame& frame;

  void plot(long x, long y, double level) {
    if (x < 0 || y < 0 || x >= frame.width() || y >= frame.height()) return;
    frame.at(static_cast<int>(x), static_cast<int>(y)) = level;
  }

  double px(double u) const { return u * (frame.width() - 1); }
  double py(double v) const { return v * (frame.height() - 1); }

  void line(Point2 a, Point2 b, double level) {
    const double x0 = px(a.x), y0 = py(a.y), x1 = px(b.x), y1 = py(b.y);
    const long steps = std::max(1L, std::lround(std::max(std::abs(x1 - x0), std::abs(y1 - y0))));
    for (long i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(steps);
      plot(std::lround(x0 + (x1 - x0) * t), std::lround(y0 + (y1 - y0) * t), level);
    }
  }

  void disc(Point2 c, double radius, double level) {
    const double cx = px(c.x), cy = py(c.y);
    const long r = static_cast<long>(std::ceil(radius));
    for (long dy = -r; dy <= r; ++dy) {
      for (long dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy <= radius * radius) plot(std::lround(cx) + dx, std::lround(cy) + dy, level);
      }
    }
  }

  void square(Point2 c, double half, double level) {
    const long cx = std::lround(px(c.x)), cy = std::lround(py(c.y));
    const long h = static_cast<long>(std::ceil(half));
    for (long dy = -h; dy <= h; ++dy) {
      for (long dx = -h; dx <= h; ++dx) plot(cx + dx, cy + dy, level);
    }
  }
};

}  // namespace

Rendering render_graph(const DataflowProgram& program, GraphId graph, const LayoutState& layout, int width, int height) {
  Rendering out{ImageFrame(width, height, kBackgroundLevel), {}};
  const auto members = flatten(program, graph);
  const std::set<VertexId> inside(members.begin(), members.end());
  auto where = [&](VertexId v) {
    auto it = layout.positions.find(v);
    return it != layout.positions.end() ? it->second : initial_position(v);
  };

  for (VertexId v : members) {
    const auto& vertex = program.vertex(v);
    NodeGlyph glyph{GlyphKind::node, v, std::string(variant_name(vertex.data)), where(v), glyph_fill(vertex.data)};
    if (const auto* ref = std::get_if<GraphRef>(&vertex.data); ref && ref->graph == graph) {
      glyph.kind = GlyphKind::self_placeholder;
      glyph.fill = kSelfPlaceholderLevel;
    }
    out.draw_list.nodes.push_back(std::move(glyph));
    for (VertexId s : vertex.sources) {
      out.draw_list.edges.push_back({s, v, where(s), where(v), !inside.contains(s)});
    }
  }

  Canvas canvas{out.raster};
  const double radius = std::max(1.0, std::min(width, height) / 32.0);
  for (const auto& e : out.draw_list.edges) {
    canvas.line(e.from_position, e.to_position, kEdgeLevel);
    // Arrow mark three quarters of the way toward the consumer.
    const Point2 mark{e.from_position.x + 0.75 * (e.to_position.x - e.from_position.x),
                      e.from_position.y + 0.75 * (e.to_position.y - e.from_position.y)};
    canvas.disc(mark, std::max(1.0, radius / 2.0), kArrowLevel);
  }
  for (const auto& g : out.draw_list.nodes) {
    if (g.kind == GlyphKind::self_placeholder) {
      canvas.square(g.position, radius * 1.5, kSelfPlaceholderLevel);
      canvas.square(g.position, radius * 0.5, kBackgroundLevel);
    } else {
      canvas.disc(g.position, radius, g.fill);
    }
  }
  return out;
}

nlohmann::json to_json(const DrawList& list) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : list.nodes) {
    nodes.push_back({{"kind", n.kind == GlyphKind::node ? "node" : "self_placeholder"},
                     {"vertex", n.vertex.value},
                     {"variant", n.variant},
                     {"x", n.position.x},
                     {"y", n.position.y}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : list.edges) {
    edges.push_back({{"from", e.from.value},
                     {"to", e.to.value},
                     {"x0", e.from_position.x},
                     {"y0", e.from_position.y},
                     {"x1", e.to_position.x},
                     {"y1", e.to_position.y},
                     {"external", e.external}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

VertexId make_graph_ref_vertex(DataflowProgram& program, GraphId graph, GraphId parent, int width, int height) {
  if (!program.contains(graph)) throw Error(Errc::unknown_graph, "graph reference to unknown graph");
  program.graph(parent);
  return program.add_vertex(parent, make_graph_ref(graph, width, height));
}

}  // namespace morphflow

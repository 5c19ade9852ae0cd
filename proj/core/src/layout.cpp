#include "morphflow/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace morphflow {

Point2 initial_position(VertexId id, const LayoutParams& params) {
  const std::uint64_t h = splitmix64(id.value);
  const double span = 1.0 - 2.0 * params.margin;
  const double u = static_cast<double>(h >> 32) / 4294967296.0;
  const double v = static_cast<double>(h & 0xffffffffULL) / 4294967296.0;
  return {params.margin + span * u, params.margin + span * v};
}

LayoutState layout_incremental(const DataflowProgram& program, GraphId graph, const LayoutState& prev,
                               const LayoutParams& params) {
  const auto members = flatten(program, graph);
  const std::size_t n = members.size();
  std::vector<Point2> pos(n);
  std::map<VertexId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    index[members[i]] = i;
    auto it = prev.positions.find(members[i]);
    pos[i] = it != prev.positions.end() ? it->second : initial_position(members[i], params);
  }

  // Ideal edge length shrinks as the graph grows so everything fits.
  const double rest = 0.6 / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)));
  std::vector<Point2> force(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = pos[i].x - pos[j].x;
      double dy = pos[i].y - pos[j].y;
      double d2 = dx * dx + dy * dy;
      if (d2 < 1e-12) {
        // Coincident points: separate along an id-derived direction.
        const double angle = static_cast<double>(splitmix64(members[i].value ^ (members[j].value << 32)) % 6283) / 1000.0;
        dx = std::cos(angle) * 1e-3;
        dy = std::sin(angle) * 1e-3;
        d2 = 1e-6;
      }
      const double f = rest * rest / d2;
      force[i].x += f * dx;
      force[i].y += f * dy;
      force[j].x -= f * dx;
      force[j].y -= f * dy;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (VertexId s : program.vertex(members[i]).sources) {
      auto it = index.find(s);
      if (it == index.end() || it->second == i) continue;
      const std::size_t j = it->second;
      const double dx = pos[j].x - pos[i].x;
      const double dy = pos[j].y - pos[i].y;
      const double d = std::hypot(dx, dy);
      if (d < 1e-12) continue;
      const double f = (d - rest) / rest;
      force[i].x += f * dx / d;
      force[i].y += f * dy / d;
      force[j].x -= f * dx / d;
      force[j].y -= f * dy / d;
    }
    force[i].x += 0.5 * (0.5 - pos[i].x);
    force[i].y += 0.5 * (0.5 - pos[i].y);
  }

  LayoutState next;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = params.gain * force[i].x;
    double dy = params.gain * force[i].y;
    const double len = std::hypot(dx, dy);
    if (len > params.step_bound) {
      dx *= params.step_bound / len;
      dy *= params.step_bound / len;
    }
    Point2 p{pos[i].x + dx, pos[i].y + dy};
    p.x = std::clamp(p.x, params.margin, 1.0 - params.margin);
    p.y = std::clamp(p.y, params.margin, 1.0 - params.margin);
    next.positions[members[i]] = p;
  }
  return next;
}

}  // namespace morphflow

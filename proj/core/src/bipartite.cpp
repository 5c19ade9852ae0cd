#include "morphflow/bipartite.hpp"

#include <map>

namespace morphflow {

bool is_transform_bearing(const VertexData& data) noexcept {
  return std::holds_alternative<DynamicImage>(data) || std::holds_alternative<Sampler>(data) ||
         std::holds_alternative<SignedSampler>(data) || std::holds_alternative<GraphRef>(data);
}

BipartiteView to_bipartite_view(const DataflowProgram& program, GraphId graph) {
  using NodeKind = BipartiteView::NodeKind;
  BipartiteView view;
  std::map<VertexId, std::size_t> stream_index;

  const auto members = flatten(program, graph);
  for (VertexId v : members) {
    stream_index.emplace(v, view.stream_nodes.size());
    view.stream_nodes.push_back({v, false});
  }
  auto stream_of = [&](VertexId v) {
    auto [it, inserted] = stream_index.emplace(v, view.stream_nodes.size());
    if (inserted) view.stream_nodes.push_back({v, true});
    return it->second;
  };

  for (VertexId v : members) {
    const auto& vertex = program.vertex(v);
    if (!is_transform_bearing(vertex.data)) continue;
    const std::size_t t = view.transform_nodes.size();
    view.transform_nodes.push_back({v});
    for (VertexId s : vertex.sources) {
      view.edges.push_back({{NodeKind::stream, stream_of(s)}, {NodeKind::transform, t}});
    }
    view.edges.push_back({{NodeKind::transform, t}, {NodeKind::stream, stream_index.at(v)}});
  }
  return view;
}

}  // namespace morphflow

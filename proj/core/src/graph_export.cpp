#include "morphflow/graph_export.hpp"

#include <set>
#include <sstream>

#include "morphflow/hash.hpp"
#include "morphflow/pgm.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;
using nlohmann::json;

namespace {

json frame_summary(const ImageFrame& f) { return {{"width", f.width()}, {"height", f.height()}}; }

json transform_json(const TransformKind& t) {
  return std::visit(overloaded{
                        [](const Identity&) { return json{{"name", "identity"}}; },
                        [](const Negation&) { return json{{"name", "negation"}}; },
                        [](const SumOf2& s) { return json{{"name", "sum_of_2"}, {"alpha", s.alpha}}; },
                        [](const Wave& w) {
                          return json{{"name", "wave"},
                                      {"amplitude", w.amplitude},
                                      {"wavelength", w.wavelength},
                                      {"speed", w.speed}};
                        },
                    },
                    t);
}

json click_json(const ClickControl& c) {
  return {{"center", {c.center.x, c.center.y}}, {"frame_count_base", c.frame_count_base}};
}

json sampler_json(const Sampler& s) {
  json out{{"weights", s.distribution.weights}, {"latest", s.latest}};
  if (s.mixture_alpha) out["mixture_alpha"] = *s.mixture_alpha;
  return out;
}

json opt_name(const NameTable* names, auto id) {
  if (!names) return nullptr;
  if (auto n = names->name_of(id)) return *n;
  return nullptr;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

json vertex_data_json(const VertexData& data) {
  json out = std::visit(
      overloaded{
          [](const ConstantImage& c) {
            json j = frame_summary(c.frame);
            j["frame_hash"] = hex64(frame_hash(c.frame));
            return j;
          },
          [](const DynamicImage& d) {
            json j = frame_summary(d.source_buffer);
            j["transform"] = transform_json(d.transform);
            if (d.click) j["click"] = click_json(*d.click);
            return j;
          },
          [](const Sampler& s) { return sampler_json(s); },
          [](const SignedSampler& s) {
            return json{{"pos_channel", sampler_json(s.pos_channel)},
                        {"neg_channel", sampler_json(s.neg_channel)},
                        {"pos_weight", s.pos_weight},
                        {"neg_weight", s.neg_weight}};
          },
          [](const NumericControl& n) { return json{{"value", n.value}}; },
          [](const ClickControl& c) { return click_json(c); },
          [](const Clock&) { return json::object(); },
          [](const GraphRef& g) {
            json j = frame_summary(g.source_buffer);
            j["graph"] = g.graph.value;
            return j;
          },
      },
      data);
  out["kind"] = std::string(variant_name(data));
  return out;
}

json to_json(const DataflowProgram& program, const NameTable* names) {
  json graphs = json::array();
  for (const auto& [id, g] : program.graphs()) {
    json targets = json::array();
    for (VertexId v : g.immediate_targets) targets.push_back(v.value);
    json subs = json::array();
    for (GraphId s : g.immediate_subgraphs) subs.push_back(s.value);
    json entry{{"id", id.value},
               {"parent", g.parent ? json(g.parent->value) : json(nullptr)},
               {"immediate_targets", std::move(targets)},
               {"immediate_subgraphs", std::move(subs)}};
    if (auto n = opt_name(names, id); !n.is_null()) entry["name"] = n;
    graphs.push_back(std::move(entry));
  }
  json vertices = json::array();
  for (const auto& [id, v] : program.vertices()) {
    json sources = json::array();
    for (VertexId s : v.sources) sources.push_back(s.value);
    json entry{{"id", id.value}, {"parent", v.parent.value}, {"sources", std::move(sources)}, {"data", vertex_data_json(v.data)}};
    if (auto n = opt_name(names, id); !n.is_null()) entry["name"] = n;
    vertices.push_back(std::move(entry));
  }
  json top = json::array();
  for (GraphId g : program.top_level_graphs()) top.push_back(g.value);
  return {{"format", "morphflow-graph/1"},
          {"clock", program.clock()},
          {"rng_seed", program.rng_seed()},
          {"main_graph", program.main_graph() ? json(program.main_graph()->value) : json(nullptr)},
          {"top_level_graphs", std::move(top)},
          {"graphs", std::move(graphs)},
          {"vertices", std::move(vertices)}};
}

std::string to_dot(const DataflowProgram& program, GraphId graph, const NameTable* names) {
  const auto members = flatten(program, graph);
  const std::set<VertexId> inside(members.begin(), members.end());
  std::ostringstream os;
  os << "digraph g" << graph.value << " {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n";
  std::set<VertexId> external;
  for (VertexId v : members) {
    const auto& vertex = program.vertex(v);
    std::string label = "v" + std::to_string(v.value);
    if (auto n = names ? names->name_of(v) : std::nullopt) label = dot_escape(*n) + " (" + label + ")";
    label += "\\n" + std::string(variant_name(vertex.data));
    if (const auto* d = std::get_if<DynamicImage>(&vertex.data)) {
      label += " " + std::string(transform_name(d->transform));
      if (const auto* s = std::get_if<SumOf2>(&d->transform)) {
        std::ostringstream a;
        a << s->alpha;
        label += " alpha=" + a.str();
      }
    } else if (const auto* r = std::get_if<GraphRef>(&vertex.data)) {
      label += " -> g" + std::to_string(r->graph.value);
    }
    os << "  v" << v.value << " [label=\"" << label << "\"];\n";
    for (VertexId s : vertex.sources) {
      if (!inside.contains(s)) external.insert(s);
    }
  }
  for (VertexId s : external) os << "  v" << s.value << " [label=\"v" << s.value << "\", style=dashed];\n";
  for (VertexId v : members) {
    for (VertexId s : program.vertex(v).sources) {
      os << "  v" << s.value << " -> v" << v.value;
      if (!inside.contains(s)) os << " [style=dashed]";
      os << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace morphflow

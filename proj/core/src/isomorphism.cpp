#include "morphflow/isomorphism.hpp"

#include <cstdio>
#include <sstream>

#include "morphflow/pgm.hpp"
#include "morphflow/hash.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string categorical_sig(const Categorical& c) {
  std::string out = "[";
  for (double w : c.weights) out += num(w) + ",";
  return out + "]";
}

std::string sampler_sig(const Sampler& s) {
  std::string out = "sampler" + categorical_sig(s.distribution);
  if (s.mixture_alpha) out += " mix=" + num(*s.mixture_alpha);
  return out;
}

std::string transform_sig(const TransformKind& t) {
  return std::visit(overloaded{
                        [](const Identity&) { return std::string("identity"); },
                        [](const Negation&) { return std::string("negation"); },
                        [](const SumOf2& s) { return "sum_of_2 alpha=" + num(s.alpha); },
                        [](const Wave& w) {
                          return "wave amp=" + num(w.amplitude) + " len=" + num(w.wavelength) + " speed=" + num(w.speed);
                        },
                    },
                    t);
}

std::string dims(const ImageFrame& f) { return std::to_string(f.width()) + "x" + std::to_string(f.height()); }

struct Canonical {
  std::vector<GraphId> graphs;
  std::vector<VertexId> vertices;
};

void walk(const DataflowProgram& p, GraphId g, Canonical& out) {
  out.graphs.push_back(g);
  const auto& graph = p.graph(g);
  for (VertexId v : graph.immediate_targets) out.vertices.push_back(v);
  for (GraphId s : graph.immediate_subgraphs) walk(p, s, out);
}

Canonical canonical(const DataflowProgram& p) {
  Canonical c;
  for (GraphId g : p.top_level_graphs()) walk(p, g, c);
  return c;
}

template <class IdT>
std::string str(IdT id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

}  // namespace

std::string data_signature(const VertexData& data) {
  return std::visit(overloaded{
                        [](const ConstantImage& c) { return "constant " + dims(c.frame) + " " + hex64(frame_hash(c.frame)); },
                        [](const DynamicImage& d) {
                          std::string out = "dynamic " + dims(d.source_buffer) + " " + transform_sig(d.transform);
                          if (d.click) out += " click";
                          return out;
                        },
                        [](const Sampler& s) { return sampler_sig(s); },
                        [](const SignedSampler& s) {
                          return "signed(" + sampler_sig(s.pos_channel) + ";" + sampler_sig(s.neg_channel) + ") w=" +
                                 num(s.pos_weight) + "," + num(s.neg_weight);
                        },
                        [](const NumericControl& n) { return "numeric " + num(n.value); },
                        [](const ClickControl&) { return std::string("click"); },
                        [](const Clock&) { return std::string("clock"); },
                        [](const GraphRef& g) { return "graph_ref " + dims(g.source_buffer); },
                    },
                    data);
}

IsomorphismResult structurally_isomorphic(const DataflowProgram& a, const DataflowProgram& b) {
  IsomorphismResult r;
  auto fail = [&r](std::string why) {
    r.isomorphic = false;
    r.mismatch = std::move(why);
    r.vertex_map.clear();
    r.graph_map.clear();
    return r;
  };

  if (a.vertices().size() != b.vertices().size()) return fail("vertex counts differ");
  if (a.graphs().size() != b.graphs().size()) return fail("graph counts differ");
  if (a.top_level_graphs().size() != b.top_level_graphs().size()) return fail("top-level graph counts differ");

  const Canonical ca = canonical(a);
  const Canonical cb = canonical(b);
  if (ca.graphs.size() != cb.graphs.size() || ca.vertices.size() != cb.vertices.size()) {
    return fail("hierarchy shapes differ");
  }
  if (ca.vertices.size() != a.vertices().size() || cb.vertices.size() != b.vertices().size()) {
    return fail("vertex table holds vertices outside the hierarchy");
  }
  for (std::size_t i = 0; i < ca.graphs.size(); ++i) r.graph_map[ca.graphs[i]] = cb.graphs[i];
  for (std::size_t i = 0; i < ca.vertices.size(); ++i) r.vertex_map[ca.vertices[i]] = cb.vertices[i];
  if (r.graph_map.size() != ca.graphs.size() || r.vertex_map.size() != ca.vertices.size()) {
    return fail("hierarchy lists an entity twice");
  }

  auto map_graph = [&](std::optional<GraphId> g) -> std::optional<GraphId> {
    if (!g) return std::nullopt;
    auto it = r.graph_map.find(*g);
    return it == r.graph_map.end() ? std::optional<GraphId>{} : std::optional<GraphId>{it->second};
  };

  if (a.main_graph().has_value() != b.main_graph().has_value() || map_graph(a.main_graph()) != b.main_graph()) {
    return fail("main graphs do not correspond");
  }

  for (std::size_t i = 0; i < ca.graphs.size(); ++i) {
    const auto& ga = a.graph(ca.graphs[i]);
    const auto& gb = b.graph(cb.graphs[i]);
    if (ga.immediate_targets.size() != gb.immediate_targets.size() ||
        ga.immediate_subgraphs.size() != gb.immediate_subgraphs.size()) {
      return fail("graph " + str(ca.graphs[i]) + " and " + str(cb.graphs[i]) + " differ in size");
    }
    if (ga.parent.has_value() != gb.parent.has_value() || map_graph(ga.parent) != gb.parent) {
      return fail("parents of " + str(ca.graphs[i]) + " and " + str(cb.graphs[i]) + " do not correspond");
    }
  }

  for (std::size_t i = 0; i < ca.vertices.size(); ++i) {
    const auto& va = a.vertex(ca.vertices[i]);
    const auto& vb = b.vertex(cb.vertices[i]);
    const std::string pair = str(ca.vertices[i]) + " and " + str(cb.vertices[i]);
    if (va.sources.size() != vb.sources.size()) return fail("source counts of " + pair + " differ");
    for (std::size_t k = 0; k < va.sources.size(); ++k) {
      auto it = r.vertex_map.find(va.sources[k]);
      if (it == r.vertex_map.end() || it->second != vb.sources[k]) return fail("sources of " + pair + " do not correspond");
    }
    if (data_signature(va.data) != data_signature(vb.data)) return fail("data of " + pair + " differ");
    const auto* ra = std::get_if<GraphRef>(&va.data);
    const auto* rb = std::get_if<GraphRef>(&vb.data);
    if (ra && rb && map_graph(ra->graph) != std::optional<GraphId>{rb->graph}) {
      return fail("graph references of " + pair + " do not correspond");
    }
  }
  r.isomorphic = true;
  return r;
}

}  // namespace morphflow

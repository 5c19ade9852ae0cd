#include "morphflow/program.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "morphflow/error.hpp"

namespace morphflow {

namespace {

std::string id_string(VertexId id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

std::string id_string(GraphId id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

}  // namespace

DataflowProgram::DataflowProgram(std::uint64_t seed) : seed_(seed), rng_(seed) {}

GraphId DataflowProgram::add_top_level_graph(bool make_main, bool replace_main) {
  if (make_main && main_ && !replace_main) {
    throw Error(Errc::precondition, "program already has a main graph (" + id_string(*main_) + ")");
  }
  const GraphId id = allocate_graph_id();
  graphs_.emplace(id, DataflowGraph{});
  top_level_.push_back(id);
  if (make_main) main_ = id;
  return id;
}

GraphId DataflowProgram::add_subgraph(GraphId parent) {
  auto& p = graph(parent);
  const GraphId id = allocate_graph_id();
  p.immediate_subgraphs.push_back(id);
  graphs_.emplace(id, DataflowGraph{{}, {}, parent});
  return id;
}

VertexId DataflowProgram::add_vertex(GraphId graph_id, VertexData data, std::vector<VertexId> sources) {
  auto& g = graph(graph_id);
  for (VertexId s : sources) {
    if (!contains(s)) throw Error(Errc::unknown_vertex, "unknown source " + id_string(s));
  }
  const VertexId id = allocate_vertex_id();
  vertices_.emplace(id, DataflowVertex{std::move(sources), std::move(data), graph_id, std::nullopt});
  g.immediate_targets.push_back(id);
  return id;
}

void DataflowProgram::set_sources(VertexId v, std::vector<VertexId> sources) {
  auto& vertex_ref = vertex(v);
  for (VertexId s : sources) {
    if (!contains(s)) throw Error(Errc::unknown_vertex, "unknown source " + id_string(s));
  }
  vertex_ref.sources = std::move(sources);
}

const DataflowVertex& DataflowProgram::vertex(VertexId id) const {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw Error(Errc::unknown_vertex, "unknown vertex " + id_string(id));
  return it->second;
}

DataflowVertex& DataflowProgram::vertex(VertexId id) {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw Error(Errc::unknown_vertex, "unknown vertex " + id_string(id));
  return it->second;
}

const DataflowGraph& DataflowProgram::graph(GraphId id) const {
  auto it = graphs_.find(id);
  if (it == graphs_.end()) throw Error(Errc::unknown_graph, "unknown graph " + id_string(id));
  return it->second;
}

DataflowGraph& DataflowProgram::graph(GraphId id) {
  auto it = graphs_.find(id);
  if (it == graphs_.end()) throw Error(Errc::unknown_graph, "unknown graph " + id_string(id));
  return it->second;
}

void DataflowProgram::set_main_graph(std::optional<GraphId> id) {
  if (id) {
    const auto& g = graph(*id);
    if (g.parent) throw Error(Errc::precondition, "main graph must be a top-level graph");
  }
  main_ = id;
}

namespace {

void flatten_into(const DataflowProgram& program, GraphId graph_id, std::vector<VertexId>& out,
                  std::set<VertexId>& seen_vertices, std::set<GraphId>& seen_graphs) {
  if (!seen_graphs.insert(graph_id).second) return;
  const auto& g = program.graph(graph_id);
  for (VertexId v : g.immediate_targets) {
    if (seen_vertices.insert(v).second) out.push_back(v);
  }
  for (GraphId s : g.immediate_subgraphs) {
    if (program.contains(s)) flatten_into(program, s, out, seen_vertices, seen_graphs);
  }
}

}  // namespace

std::vector<VertexId> flatten(const DataflowProgram& program, GraphId graph) {
  std::vector<VertexId> out;
  std::set<VertexId> seen_vertices;
  std::set<GraphId> seen_graphs;
  flatten_into(program, graph, out, seen_vertices, seen_graphs);
  return out;
}

std::vector<GraphId> graph_subtree(const DataflowProgram& program, GraphId graph) {
  std::vector<GraphId> out;
  std::set<GraphId> seen;
  std::vector<GraphId> stack{graph};
  program.graph(graph);
  while (!stack.empty()) {
    const GraphId g = stack.back();
    stack.pop_back();
    if (!seen.insert(g).second || !program.contains(g)) continue;
    out.push_back(g);
    const auto& subs = program.graph(g).immediate_subgraphs;
    for (auto it = subs.rbegin(); it != subs.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<VertexId> program_vertices(const DataflowProgram& program) {
  std::vector<VertexId> out;
  std::set<VertexId> seen_vertices;
  std::set<GraphId> seen_graphs;
  for (GraphId g : program.top_level_graphs()) {
    if (program.contains(g)) flatten_into(program, g, out, seen_vertices, seen_graphs);
  }
  return out;
}

std::vector<VertexId> consumers_of(const DataflowProgram& program, VertexId vertex) {
  std::vector<VertexId> out;
  for (const auto& [id, v] : program.vertices()) {
    if (std::find(v.sources.begin(), v.sources.end(), vertex) != v.sources.end()) out.push_back(id);
  }
  return out;
}

namespace {

class ViolationSink {
 public:
  template <class IdT>
  void add(std::string rule, IdT id, std::string detail) {
    out.push_back(Violation{std::move(rule), id_string(id), std::move(detail)});
  }

  std::vector<Violation> out;
};

void check_structure(const DataflowProgram& p, ViolationSink& sink) {
  for (const auto& [id, v] : p.vertices()) {
    auto parent = p.graphs().find(v.parent);
    if (parent == p.graphs().end()) {
      sink.add("vertex-parent-missing", id, "parent graph " + id_string(v.parent) + " does not exist");
    } else {
      const auto& targets = parent->second.immediate_targets;
      if (std::find(targets.begin(), targets.end(), id) == targets.end()) {
        sink.add("vertex-not-listed", id, "parent graph " + id_string(v.parent) + " does not list the vertex");
      }
    }
    for (VertexId s : v.sources) {
      if (!p.contains(s)) sink.add("source-dangling", id, "source " + id_string(s) + " does not exist");
    }
    if (v.forward_ref) sink.add("forward-ref-present", id, "forward reference left set outside a copy");
  }

  for (const auto& [gid, g] : p.graphs()) {
    std::set<VertexId> listed;
    for (VertexId v : g.immediate_targets) {
      if (!listed.insert(v).second) {
        sink.add("target-duplicate", gid, "vertex " + id_string(v) + " listed twice");
        continue;
      }
      auto it = p.vertices().find(v);
      if (it == p.vertices().end()) {
        sink.add("target-unknown", gid, "lists unknown vertex " + id_string(v));
      } else if (it->second.parent != gid) {
        sink.add("target-wrong-parent", gid,
                 "lists vertex " + id_string(v) + " whose parent is " + id_string(it->second.parent));
      }
    }
    std::set<GraphId> subs;
    for (GraphId s : g.immediate_subgraphs) {
      if (!subs.insert(s).second) {
        sink.add("subgraph-duplicate", gid, "subgraph " + id_string(s) + " listed twice");
        continue;
      }
      auto it = p.graphs().find(s);
      if (it == p.graphs().end()) {
        sink.add("subgraph-unknown", gid, "lists unknown subgraph " + id_string(s));
      } else if (it->second.parent != gid) {
        sink.add("subgraph-wrong-parent", gid, "lists subgraph " + id_string(s) + " registered under another parent");
      }
    }
    if (g.parent) {
      auto parent = p.graphs().find(*g.parent);
      if (parent == p.graphs().end()) {
        sink.add("graph-parent-missing", gid, "parent graph " + id_string(*g.parent) + " does not exist");
      } else {
        const auto& ps = parent->second.immediate_subgraphs;
        if (std::find(ps.begin(), ps.end(), gid) == ps.end()) {
          sink.add("graph-not-listed", gid, "parent graph " + id_string(*g.parent) + " does not list the graph");
        }
      }
    }
    // Walk up the parent chain; more steps than graphs means a loop.
    std::size_t steps = 0;
    std::optional<GraphId> cursor = g.parent;
    while (cursor && steps <= p.graphs().size()) {
      if (*cursor == gid) {
        sink.add("hierarchy-cycle", gid, "graph is its own ancestor");
        break;
      }
      auto it = p.graphs().find(*cursor);
      if (it == p.graphs().end()) break;
      cursor = it->second.parent;
      ++steps;
    }
  }

  std::set<GraphId> top;
  for (GraphId g : p.top_level_graphs()) {
    if (!top.insert(g).second) {
      sink.add("top-level-duplicate", g, "listed twice as top-level");
      continue;
    }
    auto it = p.graphs().find(g);
    if (it == p.graphs().end()) {
      sink.add("top-level-unknown", g, "top-level list names an unknown graph");
    } else if (it->second.parent) {
      sink.add("top-level-has-parent", g, "top-level graph has parent " + id_string(*it->second.parent));
    }
  }
  for (const auto& [gid, g] : p.graphs()) {
    if (!g.parent && !top.contains(gid)) sink.add("parentless-not-top-level", gid, "graph has no parent but is not top-level");
  }
  if (auto main = p.main_graph()) {
    if (!top.contains(*main) || !p.contains(*main)) sink.add("main-not-top-level", *main, "main graph is not a top-level graph");
  }
}

void check_data(const DataflowProgram& p, ViolationSink& sink) {
  for (const auto& [id, v] : p.vertices()) {
    if (const auto* d = std::get_if<DynamicImage>(&v.data)) {
      if (!d->source_buffer.same_shape(d->target_buffer)) sink.add("buffer-shape", id, "source and target buffers differ in size");
      if (const auto* sum = std::get_if<SumOf2>(&d->transform); sum && !(sum->alpha >= 0.0 && sum->alpha <= 1.0)) {
        sink.add("alpha-range", id, "sum-of-2 alpha outside [0, 1]");
      }
      if (const auto* wave = std::get_if<Wave>(&d->transform); wave && !(wave->wavelength > 0.0)) {
        sink.add("wave-params", id, "wavelength must be positive");
      }
      std::size_t image_sources = 0;
      std::size_t numeric = 0;
      std::size_t clicks = 0;
      for (VertexId s : v.sources) {
        auto it = p.vertices().find(s);
        if (it == p.vertices().end()) continue;
        const auto& sd = it->second.data;
        if (is_image_stream(sd)) {
          ++image_sources;
          if (!current_frame(sd).same_shape(d->source_buffer)) {
            sink.add("source-shape", id, "image source " + id_string(s) + " has a different frame size");
          }
        } else if (std::holds_alternative<NumericControl>(sd)) {
          ++numeric;
        } else if (std::holds_alternative<ClickControl>(sd)) {
          ++clicks;
        }
      }
      if (image_sources != image_arity(d->transform)) {
        sink.add("transform-arity", id,
                 std::string(transform_name(d->transform)) + " needs " + std::to_string(image_arity(d->transform)) +
                     " image source(s), has " + std::to_string(image_sources));
      }
      if (numeric > 1 || clicks > 1) sink.add("control-ambiguous", id, "more than one control of a kind");
    } else if (const auto* s = std::get_if<Sampler>(&v.data)) {
      if (!s->distribution.well_formed()) sink.add("sampler-distribution", id, "weights must be non-negative and sum to 1");
      std::size_t sampler_sources = 0;
      for (VertexId src : v.sources) {
        auto it = p.vertices().find(src);
        if (it != p.vertices().end() && std::holds_alternative<Sampler>(it->second.data)) ++sampler_sources;
      }
      if (s->mixture_alpha) {
        if (!(*s->mixture_alpha >= 0.0 && *s->mixture_alpha <= 1.0)) sink.add("alpha-range", id, "mixture alpha outside [0, 1]");
        if (sampler_sources != 2) sink.add("sampler-sources", id, "a mixture sampler needs exactly two sampler sources");
      }
    } else if (const auto* ss = std::get_if<SignedSampler>(&v.data)) {
      if (!ss->pos_channel.distribution.well_formed() || !ss->neg_channel.distribution.well_formed()) {
        sink.add("sampler-distribution", id, "signed sampler channel is malformed");
      }
      if (!(ss->pos_weight >= 0.0) || !(ss->neg_weight >= 0.0)) sink.add("sampler-weights", id, "channel weights must be non-negative");
    } else if (const auto* n = std::get_if<NumericControl>(&v.data)) {
      if (!(n->value >= 0.0 && n->value <= 1.0)) sink.add("control-range", id, "numeric control value outside [0, 1]");
    } else if (const auto* g = std::get_if<GraphRef>(&v.data)) {
      if (!p.contains(g->graph)) sink.add("graph-ref-dangling", id, "references unknown graph " + id_string(g->graph));
      if (!g->source_buffer.same_shape(g->target_buffer)) sink.add("buffer-shape", id, "source and target buffers differ in size");
    }
  }
}

}  // namespace

std::vector<Violation> validate(const DataflowProgram& program) {
  ViolationSink sink;
  check_structure(program, sink);
  check_data(program, sink);
  return std::move(sink.out);
}

}  // namespace morphflow

#include "morphflow/editor.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "morphflow/error.hpp"

namespace morphflow {

namespace {

template <class IdT>
std::string str(IdT id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

const DataflowVertex& existing(const DataflowProgram& p, VertexId v) { return p.vertex(v); }

void require_image(const DataflowProgram& p, VertexId v, const char* op) {
  if (!is_image_stream(existing(p, v).data)) {
    throw Error(Errc::precondition, std::string(op) + ": " + str(v) + " does not carry an image stream");
  }
}

const DynamicImage* as_dynamic(const DataflowVertex& v) { return std::get_if<DynamicImage>(&v.data); }

bool is_identity_vertex(const DataflowVertex& v) {
  const auto* d = as_dynamic(v);
  return d && std::holds_alternative<Identity>(d->transform);
}

const SumOf2* sum_of(const DataflowVertex& v) {
  const auto* d = as_dynamic(v);
  return d ? std::get_if<SumOf2>(&d->transform) : nullptr;
}

std::optional<VertexId> numeric_control_source(const DataflowProgram& p, const DataflowVertex& v) {
  for (VertexId s : v.sources) {
    if (p.contains(s) && std::holds_alternative<NumericControl>(p.vertex(s).data)) return s;
  }
  return std::nullopt;
}

std::vector<VertexId> image_sources(const DataflowProgram& p, const DataflowVertex& v) {
  std::vector<VertexId> out;
  for (VertexId s : v.sources) {
    if (p.contains(s) && is_image_stream(p.vertex(s).data)) out.push_back(s);
  }
  return out;
}

void replace_in_sources(DataflowProgram& p, VertexId from, VertexId to) {
  for (auto& [id, v] : p.vertex_table()) {
    std::replace(v.sources.begin(), v.sources.end(), from, to);
  }
}

/// Removes `v` from its parent's target list and the vertex table.
void retire(DataflowProgram& p, VertexId v) {
  auto& targets = p.graph(p.vertex(v).parent).immediate_targets;
  targets.erase(std::remove(targets.begin(), targets.end(), v), targets.end());
  p.vertex_table().erase(v);
}

/// A pass-through stream showing what `upstream` showed one tick earlier.
DynamicImage delayed_stage(TransformKind kind, const VertexData& upstream) {
  const ImageFrame& prev = previous_frame(upstream);
  return DynamicImage{std::move(kind), prev, prev, std::nullopt};
}

/// Inserts `v` (already in the table with parent set) into `graph`'s targets at `pos`.
void place_at(DataflowProgram& p, GraphId graph, std::size_t pos, VertexId v) {
  auto& targets = p.graph(graph).immediate_targets;
  targets.insert(targets.begin() + static_cast<std::ptrdiff_t>(pos), v);
}

std::size_t position_in_parent(const DataflowProgram& p, VertexId v) {
  const auto& targets = p.graph(p.vertex(v).parent).immediate_targets;
  return static_cast<std::size_t>(std::find(targets.begin(), targets.end(), v) - targets.begin());
}

}  // namespace

SplitResult node_split(DataflowProgram& program, VertexId a) {
  require_image(program, a, "node_split");

  DataflowVertex old = std::move(program.vertex(a));
  const GraphId parent = old.parent;
  const std::size_t pos = position_in_parent(program, a);
  retire(program, a);

  const VertexId b = program.allocate_vertex_id();
  const VertexId c = program.allocate_vertex_id();
  DynamicImage stage = delayed_stage(Identity{}, old.data);
  program.vertex_table().emplace(b, DataflowVertex{std::move(old.sources), std::move(old.data), parent, std::nullopt});
  program.vertex_table().emplace(c, DataflowVertex{{b}, std::move(stage), parent, std::nullopt});
  place_at(program, parent, pos, c);
  place_at(program, parent, pos, b);
  replace_in_sources(program, a, c);
  // The loop above also rewired c's own source list only if it named a; it names b.
  return {b, c};
}

void add_zero_weight_source(DataflowProgram& program, VertexId c, VertexId d) {
  const auto& cv = existing(program, c);
  if (!is_identity_vertex(cv) || cv.sources.size() != 1) {
    throw Error(Errc::precondition, "add_zero_weight_source: " + str(c) + " is not an identity vertex with one source");
  }
  require_image(program, d, "add_zero_weight_source");
  if (!current_frame(program.vertex(d).data).same_shape(as_dynamic(cv)->source_buffer)) {
    throw Error(Errc::dimension_mismatch, "add_zero_weight_source: " + str(d) + " has a different frame size");
  }
  auto& vertex = program.vertex(c);
  std::get<DynamicImage>(vertex.data).transform = SumOf2{0.0};
  vertex.sources.push_back(d);
}

void remove_zero_weight_source(DataflowProgram& program, VertexId c) {
  const auto& cv = existing(program, c);
  const SumOf2* sum = sum_of(cv);
  if (!sum || cv.sources.size() != 2 || image_sources(program, cv).size() != 2) {
    throw Error(Errc::precondition, "remove_zero_weight_source: " + str(c) + " is not a two-source sum");
  }
  if (sum->alpha != 0.0) {
    throw Error(Errc::precondition, "remove_zero_weight_source: alpha of " + str(c) + " is not exactly 0");
  }
  auto& vertex = program.vertex(c);
  std::get<DynamicImage>(vertex.data).transform = Identity{};
  vertex.sources.pop_back();
}

VertexId s_insert(DataflowProgram& program, VertexId target, VertexId side) {
  require_image(program, target, "s_insert");
  require_image(program, side, "s_insert");
  if (target == side) throw Error(Errc::precondition, "s_insert: target and side must differ");
  if (!current_frame(program.vertex(target).data).same_shape(current_frame(program.vertex(side).data))) {
    throw Error(Errc::dimension_mismatch, "s_insert: side " + str(side) + " has a different frame size");
  }

  auto& t = program.vertex(target);
  const GraphId parent = t.parent;
  const std::size_t pos = position_in_parent(program, target);
  const VertexId fresh = program.allocate_vertex_id();

  DynamicImage sum = delayed_stage(SumOf2{0.0}, t.data);
  DataflowVertex moved{std::move(t.sources), std::move(t.data), parent, std::nullopt};
  t.sources = {fresh, side};
  t.data = std::move(sum);
  program.vertex_table().emplace(fresh, std::move(moved));
  place_at(program, parent, pos, fresh);
  return fresh;
}

GraphId limited_deep_copy(DataflowProgram& program, GraphId graph, CopyDestination destination) {
  const auto subtree = graph_subtree(program, graph);
  if (destination) {
    program.graph(*destination);
    if (std::find(subtree.begin(), subtree.end(), *destination) != subtree.end()) {
      throw Error(Errc::hierarchy_cycle, "limited_deep_copy: destination " + str(*destination) + " lies inside " +
                                             str(graph));
    }
  }

  // Step 1: copy the hierarchy with fresh vertices; sources verbatim, and
  // each original points forward to its copy.
  struct Frame {
    GraphId original;
    GraphId copy;
  };
  const GraphId root = destination ? program.add_subgraph(*destination) : program.add_top_level_graph(false);
  std::vector<Frame> stack{{graph, root}};
  std::vector<GraphId> copies;
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    copies.push_back(f.copy);
    const auto targets = program.graph(f.original).immediate_targets;
    for (VertexId v : targets) {
      const VertexId fresh = program.allocate_vertex_id();
      auto& orig = program.vertex(v);
      DataflowVertex dup{orig.sources, orig.data, f.copy, std::nullopt};
      orig.forward_ref = fresh;
      program.vertex_table().emplace(fresh, std::move(dup));
      program.graph(f.copy).immediate_targets.push_back(fresh);
    }
    const auto subs = program.graph(f.original).immediate_subgraphs;
    std::vector<Frame> children;
    for (GraphId s : subs) children.push_back({s, program.add_subgraph(f.copy)});
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
  }

  // Step 2: inside the copy, follow forward references where they exist.
  // Sources outside F(graph) have none and stay shared.
  for (GraphId g : copies) {
    for (VertexId v : program.graph(g).immediate_targets) {
      for (VertexId& s : program.vertex(v).sources) {
        if (const auto& fwd = program.vertex(s).forward_ref) s = *fwd;
      }
    }
  }

  // Step 3: clear the scratch links on the original.
  for (GraphId g : subtree) {
    for (VertexId v : program.graph(g).immediate_targets) program.vertex(v).forward_ref.reset();
  }
  return root;
}

VertexId merge_identity(DataflowProgram& program, VertexId c) {
  const auto& cv = existing(program, c);
  if (!is_identity_vertex(cv) || cv.sources.size() != 1) {
    throw Error(Errc::precondition, "merge_identity: " + str(c) + " is not an identity vertex with one source");
  }
  const VertexId b = cv.sources.front();
  if (b == c) throw Error(Errc::precondition, "merge_identity: " + str(c) + " is its own source");
  if (!program.contains(b) || !is_image_stream(program.vertex(b).data)) {
    throw Error(Errc::precondition, "merge_identity: source " + str(b) + " is not an image stream");
  }
  const auto consumers = consumers_of(program, b);
  if (consumers.size() != 1 || consumers.front() != c) {
    throw Error(Errc::precondition, "merge_identity: " + str(b) + " feeds vertices other than " + str(c));
  }
  retire(program, c);
  replace_in_sources(program, c, b);
  return b;
}

SRemoveResult s_remove(DataflowProgram& program, VertexId target) {
  const auto& tv = existing(program, target);
  const SumOf2* sum = sum_of(tv);
  if (!sum) throw Error(Errc::precondition, "s_remove: " + str(target) + " is not a sum-of-2 vertex");
  if (tv.sources.size() != 2 || image_sources(program, tv).size() != 2) {
    throw Error(Errc::precondition, "s_remove: " + str(target) + " does not have exactly two image sources");
  }
  if (sum->alpha != 0.0) {
    throw Error(Errc::precondition, "s_remove: alpha of " + str(target) + " is not exactly 0");
  }
  const VertexId upstream = tv.sources[0];
  const VertexId side = tv.sources[1];
  if (upstream == target) throw Error(Errc::precondition, "s_remove: " + str(target) + " feeds itself");
  const auto consumers = consumers_of(program, upstream);
  if (consumers.size() != 1 || consumers.front() != target) {
    throw Error(Errc::precondition, "s_remove: " + str(upstream) + " feeds vertices other than " + str(target));
  }

  DataflowVertex up = std::move(program.vertex(upstream));
  retire(program, upstream);
  auto& t = program.vertex(target);
  t.sources = std::move(up.sources);
  t.data = std::move(up.data);
  return {upstream, side};
}

void remove_subgraph(DataflowProgram& program, GraphId graph) {
  const auto& g = program.graph(graph);
  if (program.main_graph() == graph) throw Error(Errc::precondition, "remove_subgraph: the main graph cannot be removed");
  const auto subtree = graph_subtree(program, graph);
  const std::set<GraphId> graphs(subtree.begin(), subtree.end());
  const auto members = flatten(program, graph);
  const std::set<VertexId> inside(members.begin(), members.end());

  for (const auto& [id, v] : program.vertices()) {
    if (inside.contains(id)) continue;
    for (VertexId s : v.sources) {
      if (inside.contains(s)) {
        throw Error(Errc::precondition, "remove_subgraph: " + str(id) + " reads " + str(s) + " inside " + str(graph));
      }
    }
    if (const auto* ref = std::get_if<GraphRef>(&v.data); ref && graphs.contains(ref->graph)) {
      throw Error(Errc::precondition, "remove_subgraph: " + str(id) + " views " + str(ref->graph) + " inside " +
                                          str(graph));
    }
  }

  if (g.parent) {
    auto& subs = program.graph(*g.parent).immediate_subgraphs;
    subs.erase(std::remove(subs.begin(), subs.end(), graph), subs.end());
  } else {
    auto& top = program.top_level_table();
    top.erase(std::remove(top.begin(), top.end(), graph), top.end());
  }
  for (VertexId v : members) program.vertex_table().erase(v);
  for (GraphId s : subtree) program.graph_table().erase(s);
}

double effective_alpha(const DataflowProgram& program, VertexId v) {
  const auto& vertex = existing(program, v);
  const SumOf2* sum = sum_of(vertex);
  if (!sum) throw Error(Errc::precondition, "effective_alpha: " + str(v) + " is not a sum-of-2 vertex");
  if (auto ctrl = numeric_control_source(program, vertex)) return std::get<NumericControl>(program.vertex(*ctrl).data).value;
  return sum->alpha;
}

void set_alpha(DataflowProgram& program, VertexId v, double value) {
  const auto& vertex = existing(program, v);
  if (!sum_of(vertex)) throw Error(Errc::precondition, "set_alpha: " + str(v) + " is not a sum-of-2 vertex");
  if (!(value >= 0.0 && value <= 1.0)) throw Error(Errc::invalid_argument, "set_alpha: value must lie in [0, 1]");
  if (auto ctrl = numeric_control_source(program, vertex)) std::get<NumericControl>(program.vertex(*ctrl).data).value = value;
  std::get<SumOf2>(std::get<DynamicImage>(program.vertex(v).data).transform).alpha = value;
}

double AlphaRamp::value_at(std::uint64_t k) const noexcept {
  if (k >= duration_ticks) return to;
  return from + (to - from) * static_cast<double>(k) / static_cast<double>(duration_ticks);
}

AlphaRamp make_ramp(const DataflowProgram& program, VertexId v, double from, double to, std::uint64_t duration_ticks) {
  if (!sum_of(existing(program, v))) throw Error(Errc::precondition, "ramp_alpha: " + str(v) + " is not a sum-of-2 vertex");
  if (!(from >= 0.0 && from <= 1.0) || !(to >= 0.0 && to <= 1.0)) {
    throw Error(Errc::invalid_argument, "ramp_alpha: endpoints must lie in [0, 1]");
  }
  if (duration_ticks < 1) throw Error(Errc::invalid_argument, "ramp_alpha: duration must be at least one tick");
  return AlphaRamp{v, from, to, duration_ticks, 0};
}

void rewire_source_unsafe(DataflowProgram& program, VertexId v, std::size_t index, VertexId new_source, UnsafeEdits) {
  auto& vertex = program.vertex(v);
  if (index >= vertex.sources.size()) throw Error(Errc::invalid_argument, "rewire: source index out of range");
  if (!program.contains(new_source)) throw Error(Errc::unknown_vertex, "rewire: unknown source " + str(new_source));
  const auto& old_data = program.vertex(vertex.sources[index]).data;
  const auto& new_data = program.vertex(new_source).data;
  if (is_image_stream(old_data) != is_image_stream(new_data) ||
      (is_image_stream(old_data) && !current_frame(old_data).same_shape(current_frame(new_data)))) {
    throw Error(Errc::precondition, "rewire: replacement source is not compatible");
  }
  vertex.sources[index] = new_source;
}

}  // namespace morphflow

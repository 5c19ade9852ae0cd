#include "morphflow/engine.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "morphflow/graph_export.hpp"
#include "morphflow/hash.hpp"
#include "morphflow/kernels.hpp"
#include "morphflow/layout.hpp"
#include "morphflow/pgm.hpp"
#include "morphflow/render.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;
using nlohmann::json;

namespace {

template <class IdT>
std::string str(IdT id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

json selector_json(const VertexSelector& s) {
  if (const auto* id = std::get_if<VertexId>(&s.ref)) return id->value;
  return std::get<std::string>(s.ref);
}

int queue_rank(const QueueItem& item) { return std::holds_alternative<EditCommand>(item) ? 0 : 1; }

}  // namespace

json to_json(const ControlEvent& event) {
  json out{{"vertex", selector_json(event.vertex)}};
  if (const auto* p = std::get_if<PixelCoord>(&event.change)) {
    out["click"] = {p->x, p->y};
  } else {
    out["value"] = std::get<double>(event.change);
  }
  return out;
}

ControlEvent control_event_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::scenario, "control: expected an object");
  ControlEvent ev;
  auto v = doc.find("vertex");
  if (v == doc.end()) throw Error(Errc::scenario, "control.vertex: missing");
  if (v->is_string()) {
    ev.vertex = VertexSelector(v->get<std::string>());
  } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
    ev.vertex = VertexSelector(VertexId{v->get<std::uint64_t>()});
  } else {
    throw Error(Errc::scenario, "control.vertex: expected an id or a label");
  }
  const bool has_click = doc.contains("click");
  const bool has_value = doc.contains("value");
  if (has_click == has_value) throw Error(Errc::scenario, "control: exactly one of 'click' and 'value' is required");
  if (has_click) {
    const json& c = doc.at("click");
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
      throw Error(Errc::scenario, "control.click: expected [x, y]");
    }
    ev.change = PixelCoord{c[0].get<double>(), c[1].get<double>()};
  } else {
    const json& val = doc.at("value");
    if (!val.is_number()) throw Error(Errc::scenario, "control.value: expected a number");
    const double x = val.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::scenario, "control.value: must lie in [0, 1]");
    ev.change = x;
  }
  return ev;
}

void FrameLog::record(Entry entry) {
  if (capacity_ == 0) return;
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(entry);
}

void EngineState::schedule(Tick tick, QueueItem item, Origin origin) {
  if (tick < program.clock()) {
    throw Error(Errc::invalid_argument, "cannot schedule at tick " + std::to_string(tick) + ", clock is already " +
                                            std::to_string(program.clock()));
  }
  QueuedItem q{tick, next_seq_++, origin, std::move(item)};
  auto pos = std::upper_bound(queue_.begin(), queue_.end(), q, [](const QueuedItem& a, const QueuedItem& b) {
    return std::tuple(a.tick, queue_rank(a.item), a.seq) < std::tuple(b.tick, queue_rank(b.item), b.seq);
  });
  queue_.insert(pos, std::move(q));
}

void register_output(EngineState& state, VertexId vertex) {
  if (!is_image_stream(state.program.vertex(vertex).data)) {
    throw Error(Errc::precondition, "output " + str(vertex) + " does not carry an image stream");
  }
  if (std::find(state.outputs.begin(), state.outputs.end(), vertex) == state.outputs.end()) {
    state.outputs.push_back(vertex);
  }
}

namespace {

void remap_outputs(EngineState& s, VertexId from, VertexId to) {
  bool had = false;
  std::vector<VertexId> out;
  for (VertexId v : s.outputs) {
    const VertexId mapped = v == from ? to : v;
    if (v == from) had = true;
    if (std::find(out.begin(), out.end(), mapped) == out.end()) out.push_back(mapped);
  }
  if (had) s.outputs = std::move(out);
}

void drop_ramps_on(EngineState& s, VertexId v) {
  std::erase_if(s.ramps, [v](const AlphaRamp& r) { return r.vertex == v; });
}

void remap_ramps(EngineState& s, VertexId from, VertexId to) {
  for (auto& r : s.ramps) {
    if (r.vertex == from) r.vertex = to;
  }
}

void require_free(const NameTable& names, const std::string& label) {
  if (names.vertex(label)) throw Error(Errc::invalid_argument, "vertex label '" + label + "' is already bound");
}

/// Label of `child` relative to graph label `scope`: "scope/x" -> "x".
std::optional<std::string> local_label(const std::optional<std::string>& scope, const std::optional<std::string>& label) {
  if (!label) return std::nullopt;
  if (scope && label->size() > scope->size() + 1 && label->compare(0, scope->size(), *scope) == 0 &&
      (*label)[scope->size()] == '/') {
    return label->substr(scope->size() + 1);
  }
  return label;
}

struct CopyLabels {
  std::vector<std::optional<std::string>> vertices;
  std::vector<std::optional<std::string>> graphs;
};

CopyLabels plan_copy_labels(const EngineState& s, GraphId g, const std::optional<std::string>& name) {
  CopyLabels plan;
  const auto members = flatten(s.program, g);
  const auto subtree = graph_subtree(s.program, g);
  const auto scope = s.names.name_of(g);
  std::set<std::string> fresh;
  for (VertexId v : members) {
    std::optional<std::string> label;
    if (name) {
      if (auto local = local_label(scope, s.names.name_of(v))) {
        label = *name + "/" + *local;
        require_free(s.names, *label);
        if (!fresh.insert(*label).second) throw Error(Errc::invalid_argument, "copy would bind '" + *label + "' twice");
      }
    }
    plan.vertices.push_back(std::move(label));
  }
  for (std::size_t i = 0; i < subtree.size(); ++i) {
    std::optional<std::string> label;
    if (name) {
      if (i == 0) {
        label = *name;
      } else if (auto local = local_label(scope, s.names.name_of(subtree[i]))) {
        label = *name + "/" + *local;
      }
      if (label && s.names.graph(*label)) throw Error(Errc::invalid_argument, "graph label '" + *label + "' is already bound");
    }
    plan.graphs.push_back(std::move(label));
  }
  return plan;
}

void unbind_all(EngineState& s, const std::vector<VertexId>& vertices, const std::vector<GraphId>& graphs) {
  for (VertexId v : vertices) s.names.unbind(v);
  for (GraphId g : graphs) s.names.unbind(g);
}

UndoRecord apply_resolved(EngineState& s, const EditCommand& cmd) {
  auto& p = s.program;
  const auto& names = s.names;
  UndoRecord undo;
  undo.tick_applied = p.clock();

  std::visit(
      overloaded{
          [&](const edit::NodeSplit& e) {
            const VertexId a = resolve(e.target, names);
            if (e.upstream_name) require_free(names, *e.upstream_name);
            const auto r = node_split(p, a);
            s.names.transfer(a, r.identity);
            if (e.upstream_name) s.names.bind(*e.upstream_name, r.upstream);
            remap_outputs(s, a, r.identity);
            remap_ramps(s, a, r.upstream);
            undo.inverse = edit::MergeIdentity{r.identity};
          },
          [&](const edit::AddZeroWeightSource& e) {
            const VertexId c = resolve(e.identity_vertex, names);
            const VertexId d = resolve(e.side_vertex, names);
            add_zero_weight_source(p, c, d);
            undo.inverse = edit::RemoveZeroWeightSource{c};
          },
          [&](const edit::RemoveZeroWeightSource& e) {
            const VertexId c = resolve(e.identity_vertex, names);
            const VertexId d = p.contains(c) && p.vertex(c).sources.size() == 2 ? p.vertex(c).sources[1] : VertexId{};
            remove_zero_weight_source(p, c);
            drop_ramps_on(s, c);
            undo.inverse = edit::AddZeroWeightSource{c, d};
          },
          [&](const edit::SInsert& e) {
            const VertexId target = resolve(e.target_vertex, names);
            const VertexId side = resolve(e.side_vertex, names);
            if (e.new_vertex_name) require_free(names, *e.new_vertex_name);
            const VertexId fresh = s_insert(p, target, side);
            if (e.new_vertex_name) s.names.bind(*e.new_vertex_name, fresh);
            remap_ramps(s, target, fresh);
            undo.inverse = edit::SRemove{target};
          },
          [&](const edit::LimitedDeepCopy& e) {
            const GraphId g = resolve(e.graph, names);
            std::optional<GraphId> dest;
            if (e.destination) dest = resolve(*e.destination, names);
            p.graph(g);
            const CopyLabels plan = plan_copy_labels(s, g, e.name);
            const GraphId copy = limited_deep_copy(p, g, dest);
            const auto members = flatten(p, copy);
            const auto subtree = graph_subtree(p, copy);
            for (std::size_t i = 0; i < members.size(); ++i) {
              if (plan.vertices[i]) s.names.bind(*plan.vertices[i], members[i]);
            }
            for (std::size_t i = 0; i < subtree.size(); ++i) {
              if (plan.graphs[i]) s.names.bind(*plan.graphs[i], subtree[i]);
            }
            undo.inverse = edit::RemoveSubgraph{copy};
          },
          [&](const edit::SetAlpha& e) {
            const VertexId v = resolve(e.vertex, names);
            const double old = effective_alpha(p, v);
            set_alpha(p, v, e.value);
            drop_ramps_on(s, v);
            undo.inverse = edit::SetAlpha{v, old};
          },
          [&](const edit::RampAlpha& e) {
            const VertexId v = resolve(e.vertex, names);
            AlphaRamp ramp = make_ramp(p, v, e.from, e.to, e.duration_ticks);
            const double old = effective_alpha(p, v);
            set_alpha(p, v, ramp.value_at(0));
            drop_ramps_on(s, v);
            s.ramps.push_back(ramp);
            undo.inverse = edit::SetAlpha{v, old};
          },
          [&](const edit::MergeIdentity& e) {
            const VertexId c = resolve(e.identity_vertex, names);
            const VertexId b = merge_identity(p, c);
            if (s.names.name_of(c)) s.names.transfer(c, b);
            remap_outputs(s, c, b);
            drop_ramps_on(s, c);
            undo.inverse = edit::NodeSplit{b, std::nullopt};
          },
          [&](const edit::SRemove& e) {
            const VertexId target = resolve(e.target_vertex, names);
            const auto r = s_remove(p, target);
            s.names.unbind(r.retired);
            drop_ramps_on(s, target);
            remap_ramps(s, r.retired, target);
            remap_outputs(s, r.retired, target);
            undo.inverse = edit::SInsert{target, r.side, std::nullopt};
          },
          [&](const edit::RemoveSubgraph& e) {
            const GraphId g = resolve(e.graph, names);
            const auto members = flatten(p, g);
            const auto subtree = graph_subtree(p, g);
            remove_subgraph(p, g);
            const std::set<VertexId> gone(members.begin(), members.end());
            std::erase_if(s.outputs, [&](VertexId v) { return gone.contains(v); });
            std::erase_if(s.ramps, [&](const AlphaRamp& r) { return gone.contains(r.vertex); });
            unbind_all(s, members, subtree);
          },
      },
      cmd);
  return undo;
}

}  // namespace

UndoRecord apply_edit(EngineState& state, const EditCommand& cmd) { return apply_resolved(state, cmd); }

ControlChange apply_control(EngineState& state, const ControlEvent& event) {
  auto& p = state.program;
  const VertexId v = resolve(event.vertex, state.names);
  auto& vertex = p.vertex(v);

  if (const auto* value = std::get_if<double>(&event.change)) {
    if (!(*value >= 0.0 && *value <= 1.0)) throw Error(Errc::invalid_argument, "control value must lie in [0, 1]");
    if (auto* n = std::get_if<NumericControl>(&vertex.data)) {
      n->value = *value;
    } else if (const auto* d = std::get_if<DynamicImage>(&vertex.data); d && std::holds_alternative<SumOf2>(d->transform)) {
      set_alpha(p, v, *value);
      drop_ramps_on(state, v);
    } else {
      throw Error(Errc::no_control, str(v) + " has no numeric control");
    }
    return ControlChange{v, *value, std::nullopt};
  }

  const PixelCoord at = std::get<PixelCoord>(event.change);
  const ClickControl click{at, p.clock()};
  auto check_bounds = [&](const ImageFrame& frame) {
    if (!(at.x >= 0.0 && at.x < frame.width() && at.y >= 0.0 && at.y < frame.height())) {
      throw Error(Errc::invalid_argument, "click outside the " + std::to_string(frame.width()) + "x" +
                                              std::to_string(frame.height()) + " frame of " + str(v));
    }
  };
  if (auto* c = std::get_if<ClickControl>(&vertex.data)) {
    *c = click;
    return ControlChange{v, std::nullopt, click};
  }
  auto* d = std::get_if<DynamicImage>(&vertex.data);
  if (!d) throw Error(Errc::no_control, str(v) + " has no click control");
  for (VertexId s : vertex.sources) {
    if (auto* c = std::get_if<ClickControl>(&p.vertex(s).data)) {
      check_bounds(d->source_buffer);
      *c = click;
      return ControlChange{v, std::nullopt, click};
    }
  }
  if (!std::holds_alternative<Wave>(d->transform)) throw Error(Errc::no_control, str(v) + " has no click control");
  check_bounds(d->source_buffer);
  d->click = click;
  return ControlChange{v, std::nullopt, click};
}

namespace {

ControlInputs resolve_controls(const DataflowProgram& p, const DataflowVertex& v) {
  ControlInputs in;
  for (VertexId s : v.sources) {
    const auto& data = p.vertex(s).data;
    if (const auto* n = std::get_if<NumericControl>(&data); n && !in.alpha) in.alpha = n->value;
    if (const auto* c = std::get_if<ClickControl>(&data); c && !in.click) in.click = *c;
  }
  return in;
}

void run_transform(DataflowProgram& p, VertexId id, Tick clock) {
  auto& vertex = p.vertex(id);
  std::visit(overloaded{
                 [&](DynamicImage& d) {
                   std::vector<const ImageFrame*> frames;
                   for (VertexId s : vertex.sources) {
                     const auto& sd = p.vertex(s).data;
                     if (is_image_stream(sd)) frames.push_back(&current_frame(sd));
                   }
                   apply_transform(d, frames, resolve_controls(p, vertex), clock);
                 },
                 [&](Sampler& s) {
                   if (s.mixture_alpha) {
                     std::vector<int> latest;
                     for (VertexId src : vertex.sources) {
                       if (const auto* q = std::get_if<Sampler>(&p.vertex(src).data)) latest.push_back(q->latest);
                     }
                     s.pending = mixture_sample(latest.at(0), latest.at(1), *s.mixture_alpha, p.rng());
                   } else {
                     s.pending = sample_categorical(s.distribution, p.rng());
                   }
                 },
                 [&](SignedSampler& s) { draw_signed(s, p.rng()); },
                 [&](GraphRef& g) {
                   g.layout = layout_incremental(p, g.graph, g.layout);
                   g.target_buffer = render_graph(p, g.graph, g.layout, g.target_buffer.width(), g.target_buffer.height()).raster;
                 },
                 [](auto&) {},
             },
             vertex.data);
}

void shift(DataflowVertex& vertex) {
  std::visit(overloaded{
                 [](DynamicImage& d) { std::swap(d.source_buffer, d.target_buffer); },
                 [](GraphRef& g) { std::swap(g.source_buffer, g.target_buffer); },
                 [](Sampler& s) { s.latest = s.pending; },
                 [](SignedSampler& s) {
                   s.pos_channel.latest = s.pos_channel.pending;
                   s.neg_channel.latest = s.neg_channel.pending;
                 },
                 [](auto&) {},
             },
             vertex.data);
}

void advance_ramps(EngineState& s) {
  std::vector<AlphaRamp> keep;
  for (AlphaRamp r : s.ramps) {
    if (!s.program.contains(r.vertex)) continue;
    const auto* d = std::get_if<DynamicImage>(&s.program.vertex(r.vertex).data);
    if (!d || !std::holds_alternative<SumOf2>(d->transform)) continue;
    ++r.step;
    set_alpha(s.program, r.vertex, r.value_at(r.step));
    if (!r.finished()) keep.push_back(r);
  }
  s.ramps = std::move(keep);
}

}  // namespace

TickResult tick(EngineState& state) {
  auto& p = state.program;
  if (auto violations = validate(p); !violations.empty()) {
    const auto& v = violations.front();
    throw Error(Errc::validation, "program is malformed (" + std::to_string(violations.size()) + " violation(s)); first: " +
                                      v.rule + " at " + v.id + ": " + v.detail);
  }

  TickResult result;
  const Tick c = p.clock();
  result.tick = c;

  for (VertexId v : state.outputs) {
    const ImageFrame& frame = current_frame(p.vertex(v).data);
    if (state.frame_log) state.frame_log->record({c, v, frame_hash(frame)});
    result.emissions.push_back({v, frame});
  }

  const std::vector<VertexId> order = p.main_graph() ? flatten(p, *p.main_graph()) : std::vector<VertexId>{};
  for (VertexId v : order) run_transform(p, v, c);
  for (VertexId v : order) shift(p.vertex(v));
  p.advance_clock();

  advance_ramps(state);
  auto& q = state.queue_;
  const auto end = std::find_if(q.begin(), q.end(), [c](const QueuedItem& item) { return item.tick > c; });
  std::vector<QueuedItem> due(std::make_move_iterator(q.begin()), std::make_move_iterator(end));
  q.erase(q.begin(), end);
  for (auto& item : due) {
    try {
      if (const auto* cmd = std::get_if<EditCommand>(&item.item)) {
        UndoRecord undo = apply_edit(state, *cmd);
        if (is_structural(*cmd)) result.structure_changed = true;
        result.applied.push_back({item.tick, item.origin, item.item, std::move(undo), std::nullopt});
      } else {
        ControlChange change = apply_control(state, std::get<ControlEvent>(item.item));
        result.applied.push_back({item.tick, item.origin, item.item, UndoRecord{std::nullopt, p.clock()}, change});
      }
    } catch (const Error& e) {
      result.failed.push_back({item.tick, item.origin, item.item, e.code(), e.what()});
    }
  }
  return result;
}

void RunTrace::append(const TickResult& result, const EngineState& state) {
  TickHashes h;
  h.tick = result.tick;
  for (const auto& e : result.emissions) h.outputs.emplace_back(e.vertex, frame_hash(e.frame));
  ticks.push_back(std::move(h));
  if (result.structure_changed) snapshots.push_back({result.tick, to_json(state.program, &state.names)});
}

RunTrace run(EngineState& state, std::uint64_t n_ticks) {
  RunTrace trace;
  for (std::uint64_t i = 0; i < n_ticks; ++i) {
    TickResult r = tick(state);
    trace.append(r, state);
    if (!r.failed.empty()) {
      const auto& f = r.failed.front();
      throw Error(f.code, "queued item at tick " + std::to_string(f.tick) + " failed: " + f.message);
    }
  }
  return trace;
}

json manifest_json(const RunTrace& trace, const ManifestInfo& info) {
  json frames = json::array();
  for (const auto& t : trace.ticks) {
    json outputs = json::array();
    for (const auto& [v, h] : t.outputs) outputs.push_back({{"vertex", v.value}, {"hash", hex64(h)}});
    frames.push_back({{"tick", t.tick}, {"outputs", std::move(outputs)}});
  }
  json snapshots = json::array();
  for (const auto& s : trace.snapshots) snapshots.push_back({{"tick", s.tick}, {"graph", s.graph}});
  return {{"format", "morphflow-manifest/1"},
          {"complete", info.complete},
          {"seed", info.seed},
          {"width", info.width},
          {"height", info.height},
          {"ticks", trace.ticks.size()},
          {"frames", std::move(frames)},
          {"snapshots", std::move(snapshots)}};
}

}  // namespace morphflow

#include "morphflow/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "morphflow/graph_export.hpp"
#include "morphflow/pgm.hpp"
#include "morphflow/render.hpp"

namespace morphflow {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) { throw Error(Errc::scenario, path + ": " + why); }

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::uint64_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  fail(path, "expected a non-negative integer");
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string() || v.get<std::string>().empty()) fail(path, "expected a non-empty string");
  return v.get<std::string>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

double unit_or(const json& obj, const std::string& path, const char* key, double fallback) {
  const double v = number_or(obj, path, key, fallback);
  if (!(v >= -1.0 && v <= 1.0)) fail(path + "." + key, "must lie in [-1, 1]");
  return v;
}

GraphDef parse_graph_def(const json& doc, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected an object");
  GraphDef g;
  g.name = as_string(require(doc, path, "name"), path + ".name");
  if (g.name.find('/') != std::string::npos) fail(path + ".name", "must not contain '/'");
  if (auto it = doc.find("vertices"); it != doc.end()) {
    if (!it->is_array()) fail(path + ".vertices", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string vp = path + ".vertices[" + std::to_string(i) + "]";
      const json& v = (*it)[i];
      if (!v.is_object()) fail(vp, "expected an object");
      VertexDef def;
      def.name = as_string(require(v, vp, "name"), vp + ".name");
      if (def.name.find('/') != std::string::npos) fail(vp + ".name", "must not contain '/'");
      def.data = require(v, vp, "data");
      if (!def.data.is_object()) fail(vp + ".data", "expected an object");
      if (auto s = v.find("sources"); s != v.end()) {
        if (!s->is_array()) fail(vp + ".sources", "expected an array");
        for (std::size_t k = 0; k < s->size(); ++k) {
          def.sources.push_back(as_string((*s)[k], vp + ".sources[" + std::to_string(k) + "]"));
        }
      }
      g.vertices.push_back(std::move(def));
    }
  }
  if (auto it = doc.find("subgraphs"); it != doc.end()) {
    if (!it->is_array()) fail(path + ".subgraphs", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      g.subgraphs.push_back(parse_graph_def((*it)[i], path + ".subgraphs[" + std::to_string(i) + "]"));
    }
  }
  return g;
}

json graph_def_json(const GraphDef& g) {
  json vertices = json::array();
  for (const auto& v : g.vertices) vertices.push_back({{"name", v.name}, {"data", v.data}, {"sources", v.sources}});
  json out{{"name", g.name}, {"vertices", std::move(vertices)}};
  if (!g.subgraphs.empty()) {
    json subs = json::array();
    for (const auto& s : g.subgraphs) subs.push_back(graph_def_json(s));
    out["subgraphs"] = std::move(subs);
  }
  return out;
}

ImageFrame pattern_frame(const json& doc, const std::string& path, int w, int h) {
  const std::string pattern = doc.contains("pattern") ? as_string(doc.at("pattern"), path + ".pattern") : "fill";
  ImageFrame f(w, h);
  const double cx = w / 2.0;
  const double cy = h / 2.0;
  if (pattern == "fill") {
    const double v = unit_or(doc, path, "value", 0.0);
    for (double& x : f.values()) x = v;
  } else if (pattern == "horizontal_ramp" || pattern == "vertical_ramp") {
    const double amp = unit_or(doc, path, "amplitude", 1.0);
    const bool horizontal = pattern == "horizontal_ramp";
    const int n = horizontal ? w : h;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int k = horizontal ? x : y;
        f.at(x, y) = n == 1 ? 0.0 : amp * (2.0 * k / (n - 1) - 1.0);
      }
    }
  } else if (pattern == "checkerboard") {
    const double cell = number_or(doc, path, "cell", 8.0);
    if (!(cell >= 1.0)) fail(path + ".cell", "must be at least 1");
    const double v = unit_or(doc, path, "value", 0.5);
    const auto c = static_cast<int>(cell);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f.at(x, y) = ((x / c + y / c) % 2 == 0) ? v : -v;
    }
  } else if (pattern == "disc") {
    const double radius = number_or(doc, path, "radius", 0.25) * std::min(w, h);
    const double v = unit_or(doc, path, "value", 1.0);
    const double bg = unit_or(doc, path, "background", -1.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f.at(x, y) = std::hypot(x - cx, y - cy) <= radius ? v : bg;
    }
  } else if (pattern == "rings") {
    const double wavelength = number_or(doc, path, "wavelength", 16.0);
    if (!(wavelength > 0.0)) fail(path + ".wavelength", "must be positive");
    const double amp = unit_or(doc, path, "amplitude", 1.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        f.at(x, y) = amp * std::cos(2.0 * std::numbers::pi * std::hypot(x - cx, y - cy) / wavelength);
      }
    }
  } else {
    fail(path + ".pattern", "unknown pattern '" + pattern + "'");
  }
  return f;
}

Categorical categorical(const json& doc, const std::string& path) {
  Categorical c;
  if (auto it = doc.find("weights"); it != doc.end()) {
    if (!it->is_array()) fail(path + ".weights", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) c.weights.push_back(as_number((*it)[i], path + ".weights[" + std::to_string(i) + "]"));
  }
  if (!c.empty() && !c.well_formed()) fail(path + ".weights", "must be non-negative, sum to 1, and have at most 16 entries");
  return c;
}

PixelCoord coord(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
  return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

VertexData data_from_json(const json& doc, const std::string& path, int w, int h, const std::map<std::string, GraphId>& graphs) {
  if (!doc.is_object()) fail(path, "expected an object");
  const std::string kind = as_string(require(doc, path, "kind"), path + ".kind");
  if (kind == "constant") return ConstantImage{pattern_frame(doc, path, w, h)};
  if (kind == "dynamic") {
    const std::string t = as_string(require(doc, path, "transform"), path + ".transform");
    TransformKind transform;
    if (t == "identity") {
      transform = Identity{};
    } else if (t == "negation") {
      transform = Negation{};
    } else if (t == "sum_of_2") {
      const double alpha = number_or(doc, path, "alpha", 0.0);
      if (!(alpha >= 0.0 && alpha <= 1.0)) fail(path + ".alpha", "must lie in [0, 1]");
      transform = SumOf2{alpha};
    } else if (t == "wave") {
      Wave wave{number_or(doc, path, "amplitude", 3.0), number_or(doc, path, "wavelength", 16.0),
                number_or(doc, path, "speed", 1.0)};
      if (!(wave.wavelength > 0.0)) fail(path + ".wavelength", "must be positive");
      transform = wave;
    } else {
      fail(path + ".transform", "unknown transform '" + t + "'");
    }
    DynamicImage d = make_dynamic(transform, w, h);
    if (auto it = doc.find("click"); it != doc.end()) {
      if (!std::holds_alternative<Wave>(transform)) fail(path + ".click", "only wave transforms carry a click");
      d.click = ClickControl{coord(*it, path + ".click"), 0};
    }
    return d;
  }
  if (kind == "sampler") {
    Sampler s{categorical(doc, path), 0, 0, std::nullopt};
    if (auto it = doc.find("mixture_alpha"); it != doc.end()) {
      const double a = as_number(*it, path + ".mixture_alpha");
      if (!(a >= 0.0 && a <= 1.0)) fail(path + ".mixture_alpha", "must lie in [0, 1]");
      s.mixture_alpha = a;
    } else if (s.distribution.empty()) {
      fail(path + ".weights", "a plain sampler needs a distribution");
    }
    return s;
  }
  if (kind == "signed_sampler") {
    SignedSampler s;
    if (auto it = doc.find("pos"); it != doc.end()) s.pos_channel.distribution = categorical(*it, path + ".pos");
    if (auto it = doc.find("neg"); it != doc.end()) s.neg_channel.distribution = categorical(*it, path + ".neg");
    s.pos_weight = number_or(doc, path, "pos_weight", 1.0);
    s.neg_weight = number_or(doc, path, "neg_weight", 0.0);
    if (!(s.pos_weight >= 0.0) || !(s.neg_weight >= 0.0)) fail(path, "channel weights must be non-negative");
    return s;
  }
  if (kind == "numeric_control") {
    const double v = number_or(doc, path, "value", 0.0);
    if (!(v >= 0.0 && v <= 1.0)) fail(path + ".value", "must lie in [0, 1]");
    return NumericControl{v};
  }
  if (kind == "click_control") {
    ClickControl c{{w / 2.0, h / 2.0}, 0};
    if (auto it = doc.find("center"); it != doc.end()) c.center = coord(*it, path + ".center");
    return c;
  }
  if (kind == "clock") return Clock{};
  if (kind == "graph_ref") {
    const std::string g = as_string(require(doc, path, "graph"), path + ".graph");
    auto it = graphs.find(g);
    if (it == graphs.end()) fail(path + ".graph", "unresolved graph '" + g + "'");
    return make_graph_ref(it->second, w, h);
  }
  fail(path + ".kind", "unknown kind '" + kind + "'");
}

struct Builder {
  const Scenario& scenario;
  EngineState& state;
  std::map<std::string, GraphId> graphs;

  struct Pending {
    VertexId id;
    std::string scope;
    const VertexDef* def;
    std::string path;
  };
  std::vector<Pending> pending;

  void create_graphs(const GraphDef& def, std::optional<GraphId> parent, const std::string& scope, bool make_main) {
    const std::string label = scope.empty() ? def.name : scope + "/" + def.name;
    if (graphs.contains(label)) throw Error(Errc::scenario, "templates: graph '" + label + "' is defined twice");
    const GraphId id = parent ? state.program.add_subgraph(*parent) : state.program.add_top_level_graph(make_main);
    graphs[label] = id;
    state.names.bind(label, id);
    for (const auto& sub : def.subgraphs) create_graphs(sub, id, label, false);
  }

  void create_vertices(const GraphDef& def, const std::string& scope, const std::string& path) {
    const std::string label = scope.empty() ? def.name : scope + "/" + def.name;
    const GraphId g = graphs.at(label);
    for (std::size_t i = 0; i < def.vertices.size(); ++i) {
      const auto& v = def.vertices[i];
      const std::string vp = path + ".vertices[" + std::to_string(i) + "]";
      const std::string vlabel = label + "/" + v.name;
      if (state.names.vertex(vlabel)) fail(vp + ".name", "duplicate vertex '" + vlabel + "'");
      const VertexId id = state.program.add_vertex(g, data_from_json(v.data, vp + ".data", scenario.width, scenario.height, graphs));
      state.names.bind(vlabel, id);
      pending.push_back({id, label, &v, vp});
    }
    for (std::size_t i = 0; i < def.subgraphs.size(); ++i) {
      create_vertices(def.subgraphs[i], label, path + ".subgraphs[" + std::to_string(i) + "]");
    }
  }

  /// A source name is looked up in the vertex's own graph, then in each
  /// enclosing graph, then as a full label.
  VertexId lookup(const std::string& scope, const std::string& name, const std::string& path) const {
    std::string s = scope;
    while (true) {
      if (auto v = state.names.vertex(s + "/" + name)) return *v;
      const auto slash = s.rfind('/');
      if (slash == std::string::npos) break;
      s.resize(slash);
    }
    if (auto v = state.names.vertex(name)) return *v;
    fail(path, "unresolved vertex '" + name + "'");
  }

  void wire() {
    for (const auto& p : pending) {
      std::vector<VertexId> sources;
      for (std::size_t k = 0; k < p.def->sources.size(); ++k) {
        sources.push_back(lookup(p.scope, p.def->sources[k], p.path + ".sources[" + std::to_string(k) + "]"));
      }
      state.program.set_sources(p.id, std::move(sources));
    }
  }
};

/// Label bookkeeping replayed without running any ticks, so names introduced
/// by edits can be checked before the run starts.
void check_references(const Scenario& s) {
  EngineState dry = instantiate(s);
  std::set<std::string> outputs_seen;
  auto note_outputs = [&] {
    for (const auto& o : s.outputs) {
      if (dry.names.vertex(o.vertex)) outputs_seen.insert(o.vertex);
    }
  };
  note_outputs();

  std::map<std::uint64_t, std::string> edit_path;
  std::map<std::uint64_t, std::string> control_path;
  {
    std::uint64_t seq = 0;
    for (std::size_t i = 0; i < s.schedule.size(); ++i) edit_path[seq++] = "schedule[" + std::to_string(i) + "].edit";
    for (std::size_t i = 0; i < s.control_script.size(); ++i) control_path[seq++] = "control_script[" + std::to_string(i) + "]";
  }

  for (const auto& item : dry.queue()) {
    if (const auto* cmd = std::get_if<EditCommand>(&item.item)) {
      try {
        apply_edit(dry, *cmd);
        // Ramps are not ticked here; jump to their end value.
        if (const auto* r = std::get_if<edit::RampAlpha>(cmd)) {
          set_alpha(dry.program, resolve(r->vertex, dry.names), r->to);
          dry.ramps.clear();
        }
      } catch (const Error& e) {
        if (e.code() == Errc::unknown_vertex || e.code() == Errc::unknown_graph) fail(edit_path[item.seq], e.what());
      }
      note_outputs();
    } else {
      const auto& ev = std::get<ControlEvent>(item.item);
      try {
        resolve(ev.vertex, dry.names);
      } catch (const Error& e) {
        fail(control_path[item.seq] + ".vertex", e.what());
      }
    }
  }
  for (std::size_t i = 0; i < s.outputs.size(); ++i) {
    if (!outputs_seen.contains(s.outputs[i].vertex)) {
      fail("outputs[" + std::to_string(i) + "].vertex", "unresolved vertex '" + s.outputs[i].vertex + "'");
    }
  }
}

std::string file_safe(std::string label) {
  for (char& c : label) {
    if (c == '/' || c == ' ') c = '_';
  }
  return label;
}

std::string tick_tag(Tick t) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << t;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "failed writing " + path.string());
}

}  // namespace

VertexData vertex_data_from_json(const json& doc, int width, int height, const std::map<std::string, GraphId>& graphs) {
  return data_from_json(doc, "data", width, height, graphs);
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("scenario", "expected a JSON object");
  Scenario s;
  s.seed = as_count(require(doc, "", "seed"), "seed");
  if (auto it = doc.find("grid"); it != doc.end()) {
    if (!it->is_object()) fail("grid", "expected an object");
    const auto w = as_count(require(*it, "grid", "width"), "grid.width");
    const auto h = as_count(require(*it, "grid", "height"), "grid.height");
    if (w < 1 || h < 1 || w > 4096 || h > 4096) fail("grid", "width and height must lie in [1, 4096]");
    s.width = static_cast<int>(w);
    s.height = static_cast<int>(h);
  }
  if (auto it = doc.find("ticks"); it != doc.end()) s.ticks = as_count(*it, "ticks");
  if (auto it = doc.find("templates"); it != doc.end()) {
    if (!it->is_array()) fail("templates", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) s.templates.push_back(parse_graph_def((*it)[i], "templates[" + std::to_string(i) + "]"));
  }
  if (auto it = doc.find("main"); it != doc.end() && !it->is_null()) {
    s.main = as_string(*it, "main");
    const bool found = std::any_of(s.templates.begin(), s.templates.end(), [&](const GraphDef& g) { return g.name == *s.main; });
    if (!found) fail("main", "no template named '" + *s.main + "'");
  }
  if (auto it = doc.find("schedule"); it != doc.end()) {
    if (!it->is_array()) fail("schedule", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "schedule[" + std::to_string(i) + "]";
      const json& e = (*it)[i];
      if (!e.is_object()) fail(p, "expected an object");
      ScheduledEdit se;
      se.tick = as_count(require(e, p, "tick"), p + ".tick");
      try {
        se.command = edit_command_from_json(require(e, p, "edit"));
      } catch (const Error& err) {
        fail(p + ".edit", err.what());
      }
      s.schedule.push_back(std::move(se));
    }
  }
  if (auto it = doc.find("control_script"); it != doc.end()) {
    if (!it->is_array()) fail("control_script", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "control_script[" + std::to_string(i) + "]";
      const json& e = (*it)[i];
      if (!e.is_object()) fail(p, "expected an object");
      ScheduledControl sc;
      sc.tick = as_count(require(e, p, "tick"), p + ".tick");
      try {
        sc.event = control_event_from_json(e);
      } catch (const Error& err) {
        fail(p, err.what());
      }
      s.control_script.push_back(std::move(sc));
    }
  }
  if (auto it = doc.find("outputs"); it != doc.end()) {
    if (!it->is_array()) fail("outputs", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "outputs[" + std::to_string(i) + "]";
      const json& o = (*it)[i];
      if (!o.is_object()) fail(p, "expected an object");
      OutputSpec spec;
      spec.vertex = as_string(require(o, p, "vertex"), p + ".vertex");
      if (auto e = o.find("every"); e != o.end()) spec.every = as_count(*e, p + ".every");
      if (spec.every < 1) fail(p + ".every", "must be at least 1");
      s.outputs.push_back(std::move(spec));
    }
  }
  for (std::size_t i = 0; i < s.schedule.size(); ++i) {
    if (s.schedule[i].tick >= s.ticks) fail("schedule[" + std::to_string(i) + "].tick", "outside [0, ticks)");
  }
  for (std::size_t i = 0; i < s.control_script.size(); ++i) {
    if (s.control_script[i].tick >= s.ticks) fail("control_script[" + std::to_string(i) + "].tick", "outside [0, ticks)");
  }
  check_references(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::scenario, path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const Scenario& s) {
  json templates = json::array();
  for (const auto& g : s.templates) templates.push_back(graph_def_json(g));
  json schedule = json::array();
  for (const auto& e : s.schedule) schedule.push_back({{"tick", e.tick}, {"edit", to_json(e.command)}});
  json controls = json::array();
  for (const auto& c : s.control_script) {
    json entry = to_json(c.event);
    entry["tick"] = c.tick;
    controls.push_back(std::move(entry));
  }
  json outputs = json::array();
  for (const auto& o : s.outputs) outputs.push_back({{"vertex", o.vertex}, {"every", o.every}});
  return {{"seed", s.seed},
          {"grid", {{"width", s.width}, {"height", s.height}}},
          {"ticks", s.ticks},
          {"templates", std::move(templates)},
          {"main", s.main ? json(*s.main) : json(nullptr)},
          {"schedule", std::move(schedule)},
          {"control_script", std::move(controls)},
          {"outputs", std::move(outputs)}};
}

EngineState instantiate(const Scenario& scenario) {
  EngineState state(create_program(scenario.seed));
  Builder b{scenario, state, {}, {}};
  if (!scenario.main) {
    const GraphId main = state.program.add_top_level_graph(true);
    b.graphs["main"] = main;
    state.names.bind("main", main);
  }
  for (const auto& t : scenario.templates) b.create_graphs(t, std::nullopt, "", scenario.main == t.name);
  for (std::size_t i = 0; i < scenario.templates.size(); ++i) {
    b.create_vertices(scenario.templates[i], "", "templates[" + std::to_string(i) + "]");
  }
  b.wire();
  if (auto v = validate(state.program); !v.empty()) {
    fail("templates", "program is malformed: " + v.front().rule + " at " + v.front().id + ": " + v.front().detail);
  }
  for (const auto& e : scenario.schedule) state.schedule(e.tick, e.command);
  for (const auto& c : scenario.control_script) state.schedule(c.tick, c.event);
  return state;
}

ScenarioRuntime::ScenarioRuntime(Scenario scenario)
    : scenario_(std::move(scenario)),
      state_(instantiate(scenario_)),
      output_resolved_(scenario_.outputs.size(), false) {
  resolve_outputs();
}

void ScenarioRuntime::resolve_outputs() {
  for (std::size_t i = 0; i < scenario_.outputs.size(); ++i) {
    if (output_resolved_[i]) continue;
    if (auto v = state_.names.vertex(scenario_.outputs[i].vertex)) {
      register_output(state_, *v);
      output_spec_of_.emplace(*v, i);
      output_resolved_[i] = true;
    }
  }
}

TickResult ScenarioRuntime::step() {
  TickResult r = tick(state_);
  trace_.append(r, state_);
  for (const auto& a : r.applied) {
    if (const auto* cmd = std::get_if<EditCommand>(&a.item)) {
      applied_edits_.push_back({a.tick, *cmd});
    } else {
      applied_controls_.push_back({a.tick, std::get<ControlEvent>(a.item)});
    }
  }
  // Labels may have moved to other vertices (splits, merges).
  std::map<VertexId, std::size_t> relabeled;
  for (const auto& [v, i] : output_spec_of_) {
    if (auto now = state_.names.vertex(scenario_.outputs[i].vertex)) relabeled.emplace(*now, i);
  }
  output_spec_of_ = std::move(relabeled);
  resolve_outputs();
  return r;
}

json ScenarioRuntime::manifest(bool complete) const {
  return manifest_json(trace_, {scenario_.seed, scenario_.width, scenario_.height, complete});
}

json ScenarioRuntime::applied_log() const {
  Scenario log = scenario_;
  log.ticks = ticks_run();
  log.schedule = applied_edits_;
  log.control_script = applied_controls_;
  return to_json(log);
}

std::optional<std::string> ScenarioRuntime::output_label(VertexId v) const {
  if (auto it = output_spec_of_.find(v); it != output_spec_of_.end()) return scenario_.outputs[it->second].vertex;
  return std::nullopt;
}

std::uint64_t ScenarioRuntime::output_every(VertexId v) const {
  if (auto it = output_spec_of_.find(v); it != output_spec_of_.end()) return scenario_.outputs[it->second].every;
  return 1;
}

RunSummary run_scenario(const Scenario& scenario, const RunOptions& options) {
  namespace fs = std::filesystem;
  const std::uint64_t ticks = options.ticks.value_or(scenario.ticks);
  ScenarioRuntime runtime(scenario);
  const fs::path frames_dir = options.out_dir / "frames";
  const fs::path graphs_dir = options.out_dir / "graphs";
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + options.out_dir.string() + ": " + ec.message());
  if (!options.hash_only) {
    fs::create_directories(frames_dir, ec);
    fs::create_directories(graphs_dir, ec);
    if (ec) throw Error(Errc::io, "cannot create output directories: " + ec.message());
  }
  auto write_manifest = [&](bool complete) {
    const json m = runtime.manifest(complete);
    write_text(options.out_dir / "manifest.json", m.dump(2) + "\n");
    return m;
  };

  try {
    for (std::uint64_t i = 0; i < ticks; ++i) {
      const TickResult r = runtime.step();
      if (!options.hash_only) {
        for (const auto& e : r.emissions) {
          if (r.tick % runtime.output_every(e.vertex) != 0) continue;
          const std::string label = runtime.output_label(e.vertex).value_or("v" + std::to_string(e.vertex.value));
          write_pgm(frames_dir / (file_safe(label) + "_t" + tick_tag(r.tick) + ".pgm"), e.frame);
        }
        if (r.structure_changed) {
          const auto& st = runtime.state();
          write_text(graphs_dir / ("tick_" + tick_tag(r.tick) + ".json"), to_json(st.program, &st.names).dump(2) + "\n");
          if (auto main = st.program.main_graph()) {
            write_text(graphs_dir / ("tick_" + tick_tag(r.tick) + ".dot"), to_dot(st.program, *main, &st.names));
          }
        }
      }
      if (!r.failed.empty()) {
        const auto& f = r.failed.front();
        throw Error(f.code, "tick " + std::to_string(f.tick) + ": " + f.message);
      }
    }
  } catch (const Error&) {
    write_manifest(false);
    throw;
  }
  return {write_manifest(true), runtime.trace().snapshots.size()};
}

}  // namespace morphflow

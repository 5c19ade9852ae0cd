#include "morphflow/edit_command.hpp"

#include "morphflow/error.hpp"
#include "overloaded.hpp"

namespace morphflow {

using detail::overloaded;
using nlohmann::json;

VertexId resolve(const VertexSelector& sel, const NameTable& names) {
  if (const auto* id = std::get_if<VertexId>(&sel.ref)) return *id;
  const auto& label = std::get<std::string>(sel.ref);
  if (auto id = names.vertex(label)) return *id;
  throw Error(Errc::unknown_vertex, "no vertex is labeled '" + label + "'");
}

GraphId resolve(const GraphSelector& sel, const NameTable& names) {
  if (const auto* id = std::get_if<GraphId>(&sel.ref)) return *id;
  const auto& label = std::get<std::string>(sel.ref);
  if (auto id = names.graph(label)) return *id;
  throw Error(Errc::unknown_graph, "no graph is labeled '" + label + "'");
}

std::string_view op_name(const EditCommand& cmd) noexcept {
  return std::visit(overloaded{
                        [](const edit::NodeSplit&) { return std::string_view("node_split"); },
                        [](const edit::AddZeroWeightSource&) { return std::string_view("add_zero_weight_source"); },
                        [](const edit::RemoveZeroWeightSource&) { return std::string_view("remove_zero_weight_source"); },
                        [](const edit::SInsert&) { return std::string_view("s_insert"); },
                        [](const edit::LimitedDeepCopy&) { return std::string_view("limited_deep_copy"); },
                        [](const edit::SetAlpha&) { return std::string_view("set_alpha"); },
                        [](const edit::RampAlpha&) { return std::string_view("ramp_alpha"); },
                        [](const edit::MergeIdentity&) { return std::string_view("merge_identity"); },
                        [](const edit::SRemove&) { return std::string_view("s_remove"); },
                        [](const edit::RemoveSubgraph&) { return std::string_view("remove_subgraph"); },
                    },
                    cmd);
}

bool is_structural(const EditCommand& cmd) noexcept {
  return !std::holds_alternative<edit::SetAlpha>(cmd) && !std::holds_alternative<edit::RampAlpha>(cmd);
}

namespace {

json sel_json(const VertexSelector& s) {
  if (const auto* id = std::get_if<VertexId>(&s.ref)) return id->value;
  return std::get<std::string>(s.ref);
}

json sel_json(const GraphSelector& s) {
  if (const auto* id = std::get_if<GraphId>(&s.ref)) return id->value;
  return std::get<std::string>(s.ref);
}

[[noreturn]] void bad(std::string_view op, std::string_view field, std::string_view why) {
  throw Error(Errc::scenario, std::string(op) + "." + std::string(field) + ": " + std::string(why));
}

const json& field(const json& doc, std::string_view op, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) bad(op, name, "missing");
  return *it;
}

template <class Sel, class IdT>
Sel selector(const json& v, std::string_view op, const char* name) {
  if (v.is_string()) return Sel(v.get<std::string>());
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) return Sel(IdT{v.get<std::uint64_t>()});
  bad(op, name, "expected an id or a label");
}

VertexSelector vsel(const json& doc, std::string_view op, const char* name) {
  return selector<VertexSelector, VertexId>(field(doc, op, name), op, name);
}

GraphSelector gsel(const json& doc, std::string_view op, const char* name) {
  return selector<GraphSelector, GraphId>(field(doc, op, name), op, name);
}

double unit_number(const json& doc, std::string_view op, const char* name) {
  const json& v = field(doc, op, name);
  if (!v.is_number()) bad(op, name, "expected a number");
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) bad(op, name, "must lie in [0, 1]");
  return x;
}

std::optional<std::string> opt_label(const json& doc, std::string_view op) {
  auto it = doc.find("as");
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string() || it->get<std::string>().empty()) bad(op, "as", "expected a non-empty label");
  return it->get<std::string>();
}

}  // namespace

json to_json(const EditCommand& cmd) {
  json out = std::visit(
      overloaded{
          [](const edit::NodeSplit& e) {
            json j{{"target", sel_json(e.target)}};
            if (e.upstream_name) j["as"] = *e.upstream_name;
            return j;
          },
          [](const edit::AddZeroWeightSource& e) {
            return json{{"identity_vertex", sel_json(e.identity_vertex)}, {"side_vertex", sel_json(e.side_vertex)}};
          },
          [](const edit::RemoveZeroWeightSource& e) { return json{{"identity_vertex", sel_json(e.identity_vertex)}}; },
          [](const edit::SInsert& e) {
            json j{{"target_vertex", sel_json(e.target_vertex)}, {"side_vertex", sel_json(e.side_vertex)}};
            if (e.new_vertex_name) j["as"] = *e.new_vertex_name;
            return j;
          },
          [](const edit::LimitedDeepCopy& e) {
            json j{{"graph", sel_json(e.graph)},
                   {"destination", e.destination ? sel_json(*e.destination) : json(nullptr)}};
            if (e.name) j["as"] = *e.name;
            return j;
          },
          [](const edit::SetAlpha& e) { return json{{"vertex", sel_json(e.vertex)}, {"value", e.value}}; },
          [](const edit::RampAlpha& e) {
            return json{{"vertex", sel_json(e.vertex)},
                        {"from", e.from},
                        {"to", e.to},
                        {"duration_ticks", e.duration_ticks}};
          },
          [](const edit::MergeIdentity& e) { return json{{"identity_vertex", sel_json(e.identity_vertex)}}; },
          [](const edit::SRemove& e) { return json{{"target_vertex", sel_json(e.target_vertex)}}; },
          [](const edit::RemoveSubgraph& e) { return json{{"graph", sel_json(e.graph)}}; },
      },
      cmd);
  out["op"] = std::string(op_name(cmd));
  return out;
}

EditCommand edit_command_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::scenario, "edit: expected an object");
  auto op_it = doc.find("op");
  if (op_it == doc.end() || !op_it->is_string()) throw Error(Errc::scenario, "edit.op: missing or not a string");
  const std::string op = op_it->get<std::string>();

  if (op == "node_split") return edit::NodeSplit{vsel(doc, op, "target"), opt_label(doc, op)};
  if (op == "add_zero_weight_source") {
    return edit::AddZeroWeightSource{vsel(doc, op, "identity_vertex"), vsel(doc, op, "side_vertex")};
  }
  if (op == "remove_zero_weight_source") return edit::RemoveZeroWeightSource{vsel(doc, op, "identity_vertex")};
  if (op == "s_insert") {
    return edit::SInsert{vsel(doc, op, "target_vertex"), vsel(doc, op, "side_vertex"), opt_label(doc, op)};
  }
  if (op == "limited_deep_copy") {
    std::optional<GraphSelector> dest;
    if (auto it = doc.find("destination"); it != doc.end() && !it->is_null()) dest = gsel(doc, op, "destination");
    return edit::LimitedDeepCopy{gsel(doc, op, "graph"), dest, opt_label(doc, op)};
  }
  if (op == "set_alpha") return edit::SetAlpha{vsel(doc, op, "vertex"), unit_number(doc, op, "value")};
  if (op == "ramp_alpha") {
    const json& d = field(doc, op, "duration_ticks");
    if (!d.is_number_integer() || d.get<std::int64_t>() < 1) bad(op, "duration_ticks", "expected an integer >= 1");
    return edit::RampAlpha{vsel(doc, op, "vertex"), unit_number(doc, op, "from"), unit_number(doc, op, "to"),
                           d.get<std::uint64_t>()};
  }
  if (op == "merge_identity") return edit::MergeIdentity{vsel(doc, op, "identity_vertex")};
  if (op == "s_remove") return edit::SRemove{vsel(doc, op, "target_vertex")};
  if (op == "remove_subgraph") return edit::RemoveSubgraph{gsel(doc, op, "graph")};
  throw Error(Errc::scenario, "edit.op: unknown operation '" + op + "'");
}

}  // namespace morphflow

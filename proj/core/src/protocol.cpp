#include "morphflow/protocol.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "morphflow/error.hpp"
#include "overloaded.hpp"

namespace morphflow::proto {

using detail::overloaded;
using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
  std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<const char*>, 8, 6>;
  if (text.size() % 4 != 0) throw morphflow::Error(Errc::invalid_argument, "base64 length is not a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  const std::string_view body = text.substr(0, text.size() - pad);
  for (char c : body) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '/';
    if (!ok) throw morphflow::Error(Errc::invalid_argument, "invalid base64 character");
  }
  std::vector<std::uint8_t> out(It(body.data()), It(body.data() + body.size()));
  out.resize(text.size() / 4 * 3 - pad);
  return out;
}

namespace {

json sel_json(const VertexSelector& s) {
  if (const auto* id = std::get_if<VertexId>(&s.ref)) return id->value;
  return std::get<std::string>(s.ref);
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw morphflow::Error(Errc::invalid_argument, field + ": " + why);
}

const json& need(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) bad(key, "missing");
  return *it;
}

double need_number(const json& doc, const char* key) {
  const json& v = need(doc, key);
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

std::uint64_t need_count(const json& doc, const char* key) {
  const json& v = need(doc, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

VertexSelector need_selector(const json& doc, const char* key) {
  const json& v = need(doc, key);
  if (v.is_string()) return VertexSelector(v.get<std::string>());
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return VertexSelector(VertexId{v.get<std::uint64_t>()});
  bad(key, "expected a vertex id or label");
}

}  // namespace

json to_json(const ServerMessage& msg) {
  return std::visit(
      overloaded{
          [](const Frame& f) {
            return json{{"type", "frame"},     {"vertex", f.vertex.value}, {"tick", f.tick},
                        {"width", f.width},    {"height", f.height},       {"pixels", base64_encode(f.pixels)}};
          },
          [](const GraphSnapshot& g) {
            return json{{"type", "graph_snapshot"}, {"tick", g.tick}, {"graph", g.graph}, {"draw_list", g.draw_list}};
          },
          [](const ControlState& c) {
            json j{{"type", "control_state"}, {"vertex", c.vertex.value}};
            if (c.value) j["value"] = *c.value;
            if (c.center) j["center"] = {c.center->x, c.center->y};
            if (c.frame_count_base) j["frame_count_base"] = *c.frame_count_base;
            return j;
          },
          [](const TickAdvanced& t) { return json{{"type", "tick_advanced"}, {"tick", t.tick}}; },
          [](const Error& e) { return json{{"type", "error"}, {"code", e.code}, {"detail", e.detail}}; },
      },
      msg);
}

ServerMessage server_message_from_json(const json& doc) {
  if (!doc.is_object()) bad("message", "expected an object");
  const json& t = need(doc, "type");
  if (!t.is_string()) bad("type", "expected a string");
  const std::string type = t.get<std::string>();
  if (type == "frame") {
    Frame f;
    f.vertex = VertexId{need_count(doc, "vertex")};
    f.tick = need_count(doc, "tick");
    f.width = static_cast<int>(need_count(doc, "width"));
    f.height = static_cast<int>(need_count(doc, "height"));
    const json& px = need(doc, "pixels");
    if (!px.is_string()) bad("pixels", "expected a base64 string");
    f.pixels = base64_decode(px.get<std::string>());
    if (f.pixels.size() != static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height)) {
      bad("pixels", "length does not match width * height");
    }
    return f;
  }
  if (type == "graph_snapshot") return GraphSnapshot{need_count(doc, "tick"), need(doc, "graph"), need(doc, "draw_list")};
  if (type == "control_state") {
    ControlState c;
    c.vertex = VertexId{need_count(doc, "vertex")};
    if (doc.contains("value")) c.value = need_number(doc, "value");
    if (auto it = doc.find("center"); it != doc.end()) {
      if (!it->is_array() || it->size() != 2) bad("center", "expected [x, y]");
      c.center = PixelCoord{(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    if (doc.contains("frame_count_base")) c.frame_count_base = need_count(doc, "frame_count_base");
    return c;
  }
  if (type == "tick_advanced") return TickAdvanced{need_count(doc, "tick")};
  if (type == "error") return Error{need(doc, "code").get<std::string>(), need(doc, "detail").get<std::string>()};
  bad("type", "unknown server message '" + type + "'");
}

json to_json(const ClientMessage& msg) {
  return std::visit(overloaded{
                        [](const Click& c) {
                          return json{{"type", "click"}, {"vertex", sel_json(c.vertex)}, {"x", c.x}, {"y", c.y}};
                        },
                        [](const SetControl& s) {
                          return json{{"type", "set_control"}, {"vertex", sel_json(s.vertex)}, {"value", s.value}};
                        },
                        [](const Edit& e) { return json{{"type", "edit"}, {"command", morphflow::to_json(e.command)}}; },
                        [](const Pace& p) { return json{{"type", "pace"}, {"ticks_per_second", p.ticks_per_second}}; },
                        [](const Pause&) { return json{{"type", "pause"}}; },
                        [](const Resume&) { return json{{"type", "resume"}}; },
                        [](const Step&) { return json{{"type", "step"}}; },
                    },
                    msg);
}

ClientMessage client_message_from_json(const json& doc) {
  if (!doc.is_object()) bad("message", "expected an object");
  const json& t = need(doc, "type");
  if (!t.is_string()) bad("type", "expected a string");
  const std::string type = t.get<std::string>();
  if (type == "click") return Click{need_selector(doc, "vertex"), need_number(doc, "x"), need_number(doc, "y")};
  if (type == "set_control") {
    const double v = need_number(doc, "value");
    if (!(v >= 0.0 && v <= 1.0)) bad("value", "must lie in [0, 1]");
    return SetControl{need_selector(doc, "vertex"), v};
  }
  if (type == "edit") {
    try {
      return Edit{edit_command_from_json(need(doc, "command"))};
    } catch (const morphflow::Error& e) {
      if (e.code() == Errc::invalid_argument) throw;
      bad("command", e.what());
    }
  }
  if (type == "pace") {
    const double tps = need_number(doc, "ticks_per_second");
    if (!(tps > 0.0 && tps <= 1000.0)) bad("ticks_per_second", "must lie in (0, 1000]");
    return Pace{tps};
  }
  if (type == "pause") return Pause{};
  if (type == "resume") return Resume{};
  if (type == "step") return Step{};
  bad("type", "unknown client message '" + type + "'");
}

}  // namespace morphflow::proto

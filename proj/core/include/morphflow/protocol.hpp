#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphflow/edit_command.hpp"
#include "morphflow/ids.hpp"
#include "morphflow/vertex_data.hpp"

// Live-service wire protocol: JSON text messages, discriminated by "type".
namespace morphflow::proto {

// Server -> client.
struct Frame {
  VertexId vertex;
  Tick tick = 0;
  int width = 0;
  int height = 0;
  /// Quantized 8-bit levels, row-major (base64 on the wire).
  std::vector<std::uint8_t> pixels;
};
struct GraphSnapshot {
  Tick tick = 0;
  nlohmann::json graph;
  nlohmann::json draw_list;
};
struct ControlState {
  VertexId vertex;
  std::optional<double> value;
  std::optional<PixelCoord> center;
  std::optional<Tick> frame_count_base;
};
struct TickAdvanced {
  Tick tick = 0;
};
struct Error {
  std::string code;
  std::string detail;
};

using ServerMessage = std::variant<Frame, GraphSnapshot, ControlState, TickAdvanced, Error>;

// Client -> server.
struct Click {
  VertexSelector vertex;
  double x = 0.0;
  double y = 0.0;
};
struct SetControl {
  VertexSelector vertex;
  double value = 0.0;
};
struct Edit {
  EditCommand command;
};
struct Pace {
  double ticks_per_second = 30.0;
};
struct Pause {};
struct Resume {};
struct Step {};

using ClientMessage = std::variant<Click, SetControl, Edit, Pace, Pause, Resume, Step>;

nlohmann::json to_json(const ServerMessage& msg);
ServerMessage server_message_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ClientMessage& msg);
/// Throws morphflow::Error(invalid_argument) with a field-level message.
ClientMessage client_message_from_json(const nlohmann::json& doc);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace morphflow::proto

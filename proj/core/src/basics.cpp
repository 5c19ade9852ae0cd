#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <string>

#include "morphflow/error.hpp"
#include "morphflow/hash.hpp"
#include "morphflow/image_frame.hpp"

namespace morphflow {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_graph: return "unknown_graph";
    case Errc::unknown_vertex: return "unknown_vertex";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::arity_mismatch: return "arity_mismatch";
    case Errc::precondition: return "precondition";
    case Errc::validation: return "validation";
    case Errc::hierarchy_cycle: return "hierarchy_cycle";
    case Errc::no_control: return "no_control";
    case Errc::scenario: return "scenario";
    case Errc::io: return "io";
  }
  return "unknown";
}

namespace {

bool value_in_range(double v) noexcept { return v >= -1.0 && v <= 1.0; }

}  // namespace

ImageFrame::ImageFrame(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(Errc::invalid_argument,
                "frame dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
  }
  if (!value_in_range(fill)) {
    throw Error(Errc::invalid_argument, "frame fill value out of [-1, 1]");
  }
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ImageFrame ImageFrame::from_values(int width, int height, std::vector<double> values) {
  ImageFrame frame(width, height);
  if (values.size() != frame.values_.size()) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(frame.values_.size()) + " values, got " +
                                              std::to_string(values.size()));
  }
  if (!std::all_of(values.begin(), values.end(), value_in_range)) {
    throw Error(Errc::invalid_argument, "frame value out of [-1, 1]");
  }
  frame.values_ = std::move(values);
  return frame;
}

bool ImageFrame::in_range() const noexcept { return std::all_of(values_.begin(), values_.end(), value_in_range); }

bool bitwise_equal(const ImageFrame& a, const ImageFrame& b) noexcept {
  if (!a.same_shape(b)) return false;
  auto va = a.values();
  auto vb = b.values();
  return std::memcmp(va.data(), vb.data(), va.size_bytes()) == 0;
}

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::uint64_t parse_hex64(std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || text.size() > 16) {
    throw Error(Errc::invalid_argument, "malformed 64-bit hex value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace morphflow

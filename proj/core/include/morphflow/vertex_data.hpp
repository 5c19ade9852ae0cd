#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <variant>

#include "morphflow/ids.hpp"
#include "morphflow/image_frame.hpp"
#include "morphflow/sampler.hpp"

namespace morphflow {

struct PixelCoord {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

// Transform kinds carried by DynamicImage.
struct Identity {
  friend bool operator==(const Identity&, const Identity&) = default;
};
struct Negation {
  friend bool operator==(const Negation&, const Negation&) = default;
};
/// (1 - alpha) * first + alpha * second.
struct SumOf2 {
  double alpha = 0.0;
  friend bool operator==(const SumOf2&, const SumOf2&) = default;
};
/// Radial sine displacement; lengths in pixels, speed in pixels per tick.
struct Wave {
  double amplitude = 0.0;
  double wavelength = 1.0;
  double speed = 0.0;
  friend bool operator==(const Wave&, const Wave&) = default;
};

using TransformKind = std::variant<Identity, Negation, SumOf2, Wave>;

/// Number of image sources a transform reads.
std::size_t image_arity(const TransformKind& kind) noexcept;
std::string_view transform_name(const TransformKind& kind) noexcept;

struct ClickControl {
  PixelCoord center;
  Tick frame_count_base = 0;
  friend bool operator==(const ClickControl&, const ClickControl&) = default;
};

struct NumericControl {
  double value = 0.0;
  friend bool operator==(const NumericControl&, const NumericControl&) = default;
};

struct Clock {
  friend bool operator==(const Clock&, const Clock&) = default;
};

struct ConstantImage {
  ImageFrame frame;
  friend bool operator==(const ConstantImage&, const ConstantImage&) = default;
};

/// An image stream produced by a transform. Transforms write `target_buffer`;
/// everyone reads `source_buffer`; the work cycle swaps them. A wave may carry
/// its own click state when no ClickControl vertex is wired in as a source.
struct DynamicImage {
  TransformKind transform;
  ImageFrame source_buffer;
  ImageFrame target_buffer;
  std::optional<ClickControl> click;
  friend bool operator==(const DynamicImage&, const DynamicImage&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Positions in the unit square, persisted across ticks.
struct LayoutState {
  std::map<VertexId, Point2> positions;
  friend bool operator==(const LayoutState&, const LayoutState&) = default;
};

/// A stream of renderings of a dataflow graph (possibly the one containing it).
struct GraphRef {
  GraphId graph;
  LayoutState layout;
  ImageFrame source_buffer;
  ImageFrame target_buffer;
  friend bool operator==(const GraphRef&, const GraphRef&) = default;
};

using VertexData = std::variant<ConstantImage, DynamicImage, Sampler, SignedSampler, NumericControl,
                                ClickControl, Clock, GraphRef>;

std::string_view variant_name(const VertexData& data) noexcept;

/// Constant, dynamic, and graph-view vertices carry image streams.
bool is_image_stream(const VertexData& data) noexcept;
bool is_control(const VertexData& data) noexcept;

/// The frame consumers read this tick. Precondition: is_image_stream(data).
const ImageFrame& current_frame(const VertexData& data);

/// The value the stream showed one tick before current_frame. For a double
/// buffered stream this is the target buffer after the swap; for a constant it
/// is the constant frame.
const ImageFrame& previous_frame(const VertexData& data);

DynamicImage make_dynamic(TransformKind kind, int width, int height);
GraphRef make_graph_ref(GraphId graph, int width, int height);

}  // namespace morphflow

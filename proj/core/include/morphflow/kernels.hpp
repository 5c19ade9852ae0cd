#pragma once

#include <optional>
#include <span>

#include "morphflow/ids.hpp"
#include "morphflow/image_frame.hpp"
#include "morphflow/vertex_data.hpp"

namespace morphflow {

/// out[p] = (1 - alpha) * a[p] + alpha * b[p], clamped to [-1, 1].
/// alpha == 0 and alpha == 1 return exact copies of a and b.
ImageFrame convex_combine(const ImageFrame& a, const ImageFrame& b, double alpha);
void convex_combine_into(const ImageFrame& a, const ImageFrame& b, double alpha, ImageFrame& out);

ImageFrame negate(const ImageFrame& a);
void negate_into(const ImageFrame& a, ImageFrame& out);

/// Reflection of `a` in a radial sine wave centered at `center`:
///   r    = |p - center|
///   d(p) = amplitude * sin(2*pi*(r - speed*t_rel) / wavelength) * (p - center) / r   (0 at r == 0)
///   out[p] = a[clamp(round(p + d(p)))]
/// Rounding is half away from zero, clamping is to the frame bounds.
ImageFrame wave_warp(const ImageFrame& a, PixelCoord center, double t_rel, const Wave& params);
void wave_warp_into(const ImageFrame& a, PixelCoord center, double t_rel, const Wave& params, ImageFrame& out);

/// Control values resolved from a vertex's control sources.
struct ControlInputs {
  std::optional<double> alpha;
  std::optional<ClickControl> click;
};

/// Runs the vertex's transform over `sources` and writes the result into
/// data.target_buffer. SumOf2 takes alpha from `controls` when present and
/// from its stored value otherwise; Wave takes its click state from
/// `controls`, then from the embedded click, then defaults to the frame
/// center with base 0.
void apply_transform(DynamicImage& data, std::span<const ImageFrame* const> sources,
                     const ControlInputs& controls, Tick clock);

}  // namespace morphflow

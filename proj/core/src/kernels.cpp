#include "morphflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "morphflow/error.hpp"

namespace morphflow {

namespace {

void require_same_shape(const ImageFrame& a, const ImageFrame& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(Errc::dimension_mismatch, std::string(what) + ": " + std::to_string(a.width()) + "x" +
                                              std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                              "x" + std::to_string(b.height()));
  }
}

void copy_into(const ImageFrame& src, ImageFrame& out) {
  auto s = src.values();
  std::copy(s.begin(), s.end(), out.values().begin());
}

}  // namespace

void convex_combine_into(const ImageFrame& a, const ImageFrame& b, double alpha, ImageFrame& out) {
  require_same_shape(a, b, "convex_combine");
  require_same_shape(a, out, "convex_combine output");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(Errc::invalid_argument, "alpha must lie in [0, 1]");
  if (alpha == 0.0) return copy_into(a, out);
  if (alpha == 1.0) return copy_into(b, out);
  auto va = a.values();
  auto vb = b.values();
  auto vo = out.values();
  const double keep = 1.0 - alpha;
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = std::clamp(keep * va[i] + alpha * vb[i], -1.0, 1.0);
}

ImageFrame convex_combine(const ImageFrame& a, const ImageFrame& b, double alpha) {
  ImageFrame out(a.width(), a.height());
  convex_combine_into(a, b, alpha, out);
  return out;
}

void negate_into(const ImageFrame& a, ImageFrame& out) {
  require_same_shape(a, out, "negate output");
  auto va = a.values();
  auto vo = out.values();
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = -va[i];
}

ImageFrame negate(const ImageFrame& a) {
  ImageFrame out(a.width(), a.height());
  negate_into(a, out);
  return out;
}

void wave_warp_into(const ImageFrame& a, PixelCoord center, double t_rel, const Wave& params, ImageFrame& out) {
  require_same_shape(a, out, "wave_warp output");
  if (t_rel < 0.0) throw Error(Errc::invalid_argument, "wave time offset must be non-negative");
  if (!(params.wavelength > 0.0)) throw Error(Errc::invalid_argument, "wavelength must be positive");
  const int w = a.width();
  const int h = a.height();
  if (params.amplitude == 0.0) return copy_into(a, out);
  const double phase_shift = params.speed * t_rel;
  const double k = 2.0 * std::numbers::pi / params.wavelength;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - center.x;
      const double dy = y - center.y;
      const double r = std::hypot(dx, dy);
      double sx = x;
      double sy = y;
      if (r > 0.0) {
        const double s = params.amplitude * std::sin(k * (r - phase_shift)) / r;
        sx += s * dx;
        sy += s * dy;
      }
      const long ix = std::clamp(std::lround(sx), 0L, static_cast<long>(w - 1));
      const long iy = std::clamp(std::lround(sy), 0L, static_cast<long>(h - 1));
      out.at(x, y) = a.at(static_cast<int>(ix), static_cast<int>(iy));
    }
  }
}

ImageFrame wave_warp(const ImageFrame& a, PixelCoord center, double t_rel, const Wave& params) {
  ImageFrame out(a.width(), a.height());
  wave_warp_into(a, center, t_rel, params, out);
  return out;
}

void apply_transform(DynamicImage& data, std::span<const ImageFrame* const> sources, const ControlInputs& controls,
                     Tick clock) {
  const std::size_t arity = image_arity(data.transform);
  if (sources.size() != arity) {
    throw Error(Errc::arity_mismatch, std::string(transform_name(data.transform)) + " expects " +
                                          std::to_string(arity) + " image source(s), got " +
                                          std::to_string(sources.size()));
  }
  for (const ImageFrame* frame : sources) {
    if (frame == nullptr) throw Error(Errc::precondition, "source is not producing frames");
  }
  ImageFrame& out = data.target_buffer;
  if (std::holds_alternative<Identity>(data.transform)) {
    require_same_shape(*sources[0], out, "identity");
    copy_into(*sources[0], out);
  } else if (std::holds_alternative<Negation>(data.transform)) {
    negate_into(*sources[0], out);
  } else if (const auto* sum = std::get_if<SumOf2>(&data.transform)) {
    convex_combine_into(*sources[0], *sources[1], controls.alpha.value_or(sum->alpha), out);
  } else if (const auto* wave = std::get_if<Wave>(&data.transform)) {
    ClickControl click{PixelCoord{out.width() / 2.0, out.height() / 2.0}, 0};
    if (controls.click) {
      click = *controls.click;
    } else if (data.click) {
      click = *data.click;
    }
    const double t_rel = clock >= click.frame_count_base ? static_cast<double>(clock - click.frame_count_base) : 0.0;
    wave_warp_into(*sources[0], click.center, t_rel, *wave, out);
  }
}

}  // namespace morphflow

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "morphflow/image_frame.hpp"

namespace morphflow {

/// v -> round((v + 1) * 127.5), rounding half away from zero. -1 -> 0, 0 -> 128, 1 -> 255.
std::uint8_t quantize(double value) noexcept;

/// b -> b / 127.5 - 1.
double dequantize(std::uint8_t level) noexcept;

/// Binary PGM: "P5\n<width> <height>\n255\n" followed by width*height bytes, row-major.
std::vector<std::uint8_t> encode_pgm(const ImageFrame& frame);

/// Accepts any P5 file with maxval 255 (comments and arbitrary whitespace in the header).
ImageFrame decode_pgm(std::span<const std::uint8_t> bytes);

void write_pgm(const std::filesystem::path& path, const ImageFrame& frame);
ImageFrame read_pgm(const std::filesystem::path& path);

/// FNV-1a 64 over encode_pgm(frame), header included. This is the frame hash
/// recorded in run manifests.
std::uint64_t frame_hash(const ImageFrame& frame);

}  // namespace morphflow

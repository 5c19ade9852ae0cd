#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace morphflow {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// 64-bit FNV-1a. `seed` allows incremental hashing of several buffers.
constexpr std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                                std::uint64_t seed = kFnvOffsetBasis) noexcept {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = kFnvOffsetBasis) noexcept {
  std::uint64_t h = seed;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

/// Sixteen lowercase hex digits, zero padded.
std::string hex64(std::uint64_t value);

/// Inverse of hex64; throws Error(invalid_argument) on malformed input.
std::uint64_t parse_hex64(std::string_view text);

}  // namespace morphflow

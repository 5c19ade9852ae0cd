#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace morphflow {

/// Opaque program-scoped identifier. Ids are allocated monotonically and never
/// reused after the owning entity is retired.
template <class Tag>
struct Id {
  std::uint64_t value = 0;

  auto operator<=>(const Id&) const = default;
};

using VertexId = Id<struct VertexTag>;
using GraphId = Id<struct GraphTag>;

/// Global clock value. Tick `t` is the t-th execution of the work cycle.
using Tick = std::uint64_t;

inline std::ostream& operator<<(std::ostream& os, VertexId id) { return os << 'v' << id.value; }
inline std::ostream& operator<<(std::ostream& os, GraphId id) { return os << 'g' << id.value; }

}  // namespace morphflow

template <class Tag>
struct std::hash<morphflow::Id<Tag>> {
  std::size_t operator()(const morphflow::Id<Tag>& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

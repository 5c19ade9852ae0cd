#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace morphflow {

enum class Errc {
  unknown_graph,
  unknown_vertex,
  invalid_argument,
  dimension_mismatch,
  arity_mismatch,
  precondition,
  validation,
  hierarchy_cycle,
  no_control,
  scenario,
  io,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries a machine-readable code; the
/// live service forwards it verbatim in Error messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace morphflow

#pragma once

#include <map>
#include <optional>
#include <string>

#include "morphflow/ids.hpp"

namespace morphflow {

/// Bidirectional human-readable labels for vertices and graphs. Scenario files
/// and edit commands may refer to either labels or raw ids.
class NameTable {
 public:
  /// Throws Error(invalid_argument) if the name is taken by another entity.
  void bind(const std::string& name, VertexId id);
  void bind(const std::string& name, GraphId id);

  void unbind(VertexId id);
  void unbind(GraphId id);

  /// Moves `from`'s label (if any) onto `to`, replacing `to`'s label.
  void transfer(VertexId from, VertexId to);

  std::optional<VertexId> vertex(const std::string& name) const;
  std::optional<GraphId> graph(const std::string& name) const;
  std::optional<std::string> name_of(VertexId id) const;
  std::optional<std::string> name_of(GraphId id) const;

  bool empty() const noexcept { return vertex_by_name_.empty() && graph_by_name_.empty(); }

 private:
  std::map<std::string, VertexId> vertex_by_name_;
  std::map<VertexId, std::string> vertex_name_;
  std::map<std::string, GraphId> graph_by_name_;
  std::map<GraphId, std::string> graph_name_;
};

}  // namespace morphflow

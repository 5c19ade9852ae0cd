#include "morphflow/names.hpp"

#include "morphflow/error.hpp"

namespace morphflow {

void NameTable::bind(const std::string& name, VertexId id) {
  if (auto it = vertex_by_name_.find(name); it != vertex_by_name_.end() && it->second != id) {
    throw Error(Errc::invalid_argument, "vertex name '" + name + "' is already bound");
  }
  unbind(id);
  vertex_by_name_[name] = id;
  vertex_name_[id] = name;
}

void NameTable::bind(const std::string& name, GraphId id) {
  if (auto it = graph_by_name_.find(name); it != graph_by_name_.end() && it->second != id) {
    throw Error(Errc::invalid_argument, "graph name '" + name + "' is already bound");
  }
  unbind(id);
  graph_by_name_[name] = id;
  graph_name_[id] = name;
}

void NameTable::unbind(VertexId id) {
  if (auto it = vertex_name_.find(id); it != vertex_name_.end()) {
    vertex_by_name_.erase(it->second);
    vertex_name_.erase(it);
  }
}

void NameTable::unbind(GraphId id) {
  if (auto it = graph_name_.find(id); it != graph_name_.end()) {
    graph_by_name_.erase(it->second);
    graph_name_.erase(it);
  }
}

void NameTable::transfer(VertexId from, VertexId to) {
  auto it = vertex_name_.find(from);
  if (it == vertex_name_.end()) return;
  const std::string name = it->second;
  unbind(from);
  bind(name, to);
}

std::optional<VertexId> NameTable::vertex(const std::string& name) const {
  if (auto it = vertex_by_name_.find(name); it != vertex_by_name_.end()) return it->second;
  return std::nullopt;
}

std::optional<GraphId> NameTable::graph(const std::string& name) const {
  if (auto it = graph_by_name_.find(name); it != graph_by_name_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::string> NameTable::name_of(VertexId id) const {
  if (auto it = vertex_name_.find(id); it != vertex_name_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::string> NameTable::name_of(GraphId id) const {
  if (auto it = graph_name_.find(id); it != graph_name_.end()) return it->second;
  return std::nullopt;
}

}  // namespace morphflow

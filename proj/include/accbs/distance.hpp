#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "accbs/grid.hpp"

namespace accbs {

// Shortest-path distances TO one goal vertex (the terminal cost gamma).
struct DistanceField {
  VertexId goal = kNoVertex;
  std::vector<Cost> dist;  // kUnreachable where the goal cannot be reached

  Cost operator[](VertexId v) const { return dist[v]; }
  bool reachable(VertexId v) const { return dist[v] != kUnreachable; }
};

DistanceField distance_field(const Graph& graph, VertexId goal);

/// Memoizes distance fields by goal vertex. Thread-safe; entries are never
/// evicted.
class DistanceCache {
 public:
  explicit DistanceCache(std::shared_ptr<const Graph> graph) : graph_(std::move(graph)) {}

  std::shared_ptr<const DistanceField> get(VertexId goal);
  const Graph& graph() const { return *graph_; }
  size_t size() const;

 private:
  std::shared_ptr<const Graph> graph_;
  mutable std::mutex mu_;
  std::unordered_map<VertexId, std::shared_ptr<const DistanceField>> fields_;
};

}  // namespace accbs

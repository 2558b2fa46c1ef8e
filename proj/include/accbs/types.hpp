#pragma once

#include <cstdint>
#include <functional>
#include <limits>

namespace accbs {

// Vertices are dense indices over passable cells in row-major order.
using VertexId = std::int32_t;
using AgentId = std::int32_t;
using Cost = std::int32_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr Cost kUnreachable = std::numeric_limits<Cost>::max();

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Directed edge; from == to is the wait self-loop.
struct Edge {
  VertexId from = kNoVertex;
  VertexId to = kNoVertex;
  bool is_wait() const { return from == to; }
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

}  // namespace accbs

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "accbs/types.hpp"

namespace accbs {

/// Raised for malformed map/scenario input. `line()` is 1-based, 0 when the
/// problem is not tied to a single line.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<bool> passable;  // row-major, height * width

  bool is_passable(int row, int col) const {
    return row >= 0 && col >= 0 && row < height && col < width && passable[row * width + col];
  }
  int passable_count() const;
};

// MovingAI .map format: `type`, `height H`, `width W`, `map`, then H rows.
// '.' and 'G' are passable; '@', 'O', 'T', 'W' are blocked.
GridMap parse_map(std::string_view text);
GridMap load_map(const std::filesystem::path& path);

/// Directed reflexive 4-connected grid graph. Self-loops are implicit: every
/// vertex can wait, and `neighbors()` lists only the non-loop out-edges,
/// sorted by vertex id.
class Graph {
 public:
  explicit Graph(const GridMap& map);

  int num_vertices() const { return static_cast<int>(cells_.size()); }
  // Directed edge count including one self-loop per vertex.
  int num_edges() const;

  Cell cell(VertexId v) const { return cells_[v]; }
  VertexId vertex_at(int row, int col) const;
  VertexId vertex_at(Cell c) const { return vertex_at(c.row, c.col); }
  bool contains(VertexId v) const { return v >= 0 && v < num_vertices(); }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  bool has_edge(VertexId u, VertexId w) const;

  // Connected-component label; the graph is symmetric so this is reachability.
  int component(VertexId v) const { return component_[v]; }

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_;
  int height_;
  std::vector<Cell> cells_;
  std::vector<VertexId> index_;  // cell -> vertex or kNoVertex
  std::vector<int> offsets_;
  std::vector<VertexId> adjacency_;
  std::vector<int> component_;
};

inline Graph build_graph(const GridMap& map) { return Graph(map); }

}  // namespace accbs

#include "accbs/grid.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

namespace accbs {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

int GridMap::passable_count() const {
  return static_cast<int>(std::count(passable.begin(), passable.end(), true));
}

namespace {

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

int parse_dimension(std::string_view line, std::string_view key, int lineno) {
  std::istringstream in{std::string(line)};
  std::string k;
  long value = 0;
  if (!(in >> k >> value) || k != key) {
    throw ParseError(lineno, "expected '" + std::string(key) + " <n>'");
  }
  if (value <= 0 || value > 100000) throw ParseError(lineno, std::string(key) + " must be positive");
  return static_cast<int>(value);
}

}  // namespace

GridMap parse_map(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(trim_cr(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  // A trailing newline yields one empty line; drop trailing empties.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.size() < 4) throw ParseError(static_cast<int>(lines.size()) + 1, "truncated map header");
  if (!lines[0].starts_with("type")) throw ParseError(1, "expected 'type <name>'");

  GridMap map;
  // MovingAI files always list height before width, but be lenient on order.
  if (lines[1].starts_with("width")) {
    map.width = parse_dimension(lines[1], "width", 2);
    map.height = parse_dimension(lines[2], "height", 3);
  } else {
    map.height = parse_dimension(lines[1], "height", 2);
    map.width = parse_dimension(lines[2], "width", 3);
  }
  if (lines[3] != "map") throw ParseError(4, "expected 'map'");

  const size_t rows = lines.size() - 4;
  if (rows != static_cast<size_t>(map.height)) {
    throw ParseError(static_cast<int>(lines.size()),
                     "expected " + std::to_string(map.height) + " rows, found " + std::to_string(rows));
  }
  map.passable.assign(static_cast<size_t>(map.width) * map.height, false);
  for (int r = 0; r < map.height; ++r) {
    const int lineno = r + 5;
    std::string_view row = lines[r + 4];
    if (row.size() != static_cast<size_t>(map.width)) {
      throw ParseError(lineno, "expected " + std::to_string(map.width) + " columns, found " +
                                   std::to_string(row.size()));
    }
    for (int c = 0; c < map.width; ++c) {
      switch (row[c]) {
        case '.':
        case 'G':
          map.passable[r * map.width + c] = true;
          break;
        case '@':
        case 'O':
        case 'T':
        case 'W':
          break;
        default:
          throw ParseError(lineno, std::string("unknown terrain character '") + row[c] + "'");
      }
    }
  }
  if (map.passable_count() == 0) throw ParseError(0, "map has no passable cell");
  return map;
}

GridMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open map file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

Graph::Graph(const GridMap& map) : width_(map.width), height_(map.height) {
  if (map.width <= 0 || map.height <= 0 ||
      map.passable.size() != static_cast<size_t>(map.width) * map.height) {
    throw std::invalid_argument("grid map dimensions do not match its cell matrix");
  }
  index_.assign(map.passable.size(), kNoVertex);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (map.passable[r * width_ + c]) {
        index_[r * width_ + c] = static_cast<VertexId>(cells_.size());
        cells_.push_back({r, c});
      }
    }
  }
  if (cells_.empty()) throw std::invalid_argument("grid map has no passable cell");

  offsets_.reserve(cells_.size() + 1);
  offsets_.push_back(0);
  static constexpr int kDr[] = {-1, 0, 0, 1};
  static constexpr int kDc[] = {0, -1, 1, 0};
  for (const Cell& cell : cells_) {
    // Up, left, right, down visits neighbors in increasing row-major id.
    for (int k = 0; k < 4; ++k) {
      VertexId w = vertex_at(cell.row + kDr[k], cell.col + kDc[k]);
      if (w != kNoVertex) adjacency_.push_back(w);
    }
    offsets_.push_back(static_cast<int>(adjacency_.size()));
  }

  component_.assign(cells_.size(), -1);
  int label = 0;
  for (VertexId s = 0; s < num_vertices(); ++s) {
    if (component_[s] != -1) continue;
    std::queue<VertexId> q;
    q.push(s);
    component_[s] = label;
    while (!q.empty()) {
      VertexId u = q.front();
      q.pop();
      for (VertexId w : neighbors(u)) {
        if (component_[w] == -1) {
          component_[w] = label;
          q.push(w);
        }
      }
    }
    ++label;
  }
}

int Graph::num_edges() const { return num_vertices() + static_cast<int>(adjacency_.size()); }

VertexId Graph::vertex_at(int row, int col) const {
  if (row < 0 || col < 0 || row >= height_ || col >= width_) return kNoVertex;
  return index_[row * width_ + col];
}

bool Graph::has_edge(VertexId u, VertexId w) const {
  if (!contains(u) || !contains(w)) return false;
  if (u == w) return true;
  auto nb = neighbors(u);
  return std::find(nb.begin(), nb.end(), w) != nb.end();
}

}  // namespace accbs

#pragma once

// Small independent reference computations shared by the test suites. None of
// these call into the library beyond building graphs.

#include <algorithm>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "accbs/grid.hpp"
#include "accbs/instance.hpp"
#include "accbs/model.hpp"

namespace testsupport {

using namespace accbs;

inline std::string map_text(const std::vector<std::string>& rows) {
  std::string text = "type octile\nheight " + std::to_string(rows.size()) + "\nwidth " +
                     std::to_string(rows.empty() ? 0 : rows[0].size()) + "\nmap\n";
  for (const auto& r : rows) text += r + "\n";
  return text;
}

inline std::shared_ptr<const Graph> grid(const std::vector<std::string>& rows) {
  return std::make_shared<const Graph>(build_graph(parse_map(map_text(rows))));
}

inline std::shared_ptr<const Graph> empty_grid(int h, int w) {
  return grid(std::vector<std::string>(h, std::string(w, '.')));
}

inline Instance make(std::shared_ptr<const Graph> g, const std::vector<std::pair<Cell, Cell>>& agents) {
  std::vector<AgentSpec> specs;
  for (size_t i = 0; i < agents.size(); ++i) {
    specs.push_back({static_cast<AgentId>(i), g->vertex_at(agents[i].first), g->vertex_at(agents[i].second)});
  }
  return make_instance(g, specs);
}

constexpr int kInf = 1 << 28;

// Floyd-Warshall over explicit 4-neighborhood adjacency recomputed from cells.
inline std::vector<std::vector<int>> all_pairs(const Graph& g) {
  const int n = g.num_vertices();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int u = 0; u < n; ++u) {
    d[u][u] = 0;
    for (int w = 0; w < n; ++w) {
      const Cell a = g.cell(u), b = g.cell(w);
      if (std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1) d[u][w] = 1;
    }
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline bool adjacent_or_same(const Graph& g, VertexId u, VertexId w) {
  const Cell a = g.cell(u), b = g.cell(w);
  return std::abs(a.row - b.row) + std::abs(a.col - b.col) <= 1;
}

// Every H-step walk from `start` (waits included).
inline std::vector<std::vector<VertexId>> enumerate_walks(const Graph& g, VertexId start, int H) {
  std::vector<std::vector<VertexId>> out{{start}};
  for (int t = 0; t < H; ++t) {
    std::vector<std::vector<VertexId>> next;
    for (const auto& w : out) {
      for (VertexId v = 0; v < g.num_vertices(); ++v) {
        if (!adjacent_or_same(g, w.back(), v)) continue;
        auto ext = w;
        ext.push_back(v);
        next.push_back(std::move(ext));
      }
    }
    out = std::move(next);
  }
  return out;
}

// Running cost over [0, h) plus the distance from v_h; kInf if unreachable.
inline int naive_cost(const std::vector<VertexId>& walk, VertexId goal, const std::vector<std::vector<int>>& apsp,
                      int h = -1) {
  if (h < 0) h = static_cast<int>(walk.size()) - 1;
  int c = 0;
  for (int t = 0; t < h; ++t) c += walk[t] != goal;
  const int q = apsp[walk[h]][goal];
  return q >= kInf ? kInf : c + q;
}

inline bool naive_satisfies(const std::vector<VertexId>& walk, AgentId agent, const std::vector<Constraint>& cons) {
  for (const auto& c : cons) {
    if (c.agent != agent) continue;
    if (c.kind == ConflictKind::kVertex) {
      if (c.time < static_cast<int>(walk.size()) && walk[c.time] == c.from) return false;
    } else if (c.time + 1 < static_cast<int>(walk.size()) && walk[c.time] == c.from && walk[c.time + 1] == c.to) {
      return false;
    }
  }
  return true;
}

// (time, kind: 0 vertex / 1 edge, i, j) for every conflicting incidence in [0, h].
using NaiveConflict = std::tuple<int, int, int, int>;
inline std::vector<NaiveConflict> naive_conflicts(const std::vector<std::vector<VertexId>>& paths, int h) {
  std::vector<NaiveConflict> out;
  const int n = static_cast<int>(paths.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int t = 0; t <= h; ++t) {
        if (paths[i][t] == paths[j][t]) out.emplace_back(t, 0, i, j);
        if (t >= 1 && paths[i][t - 1] == paths[j][t] && paths[i][t] == paths[j][t - 1] &&
            paths[i][t] != paths[i][t - 1]) {
          out.emplace_back(t, 1, i, j);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool naive_transition_ok(const std::vector<VertexId>& from, const std::vector<VertexId>& to) {
  for (size_t i = 0; i < from.size(); ++i) {
    for (size_t j = i + 1; j < from.size(); ++j) {
      if (to[i] == to[j]) return false;
      if (to[i] == from[j] && to[j] == from[i] && from[i] != to[i]) return false;
    }
  }
  return true;
}

inline std::vector<std::vector<VertexId>> vertices_of(const JointTrajectory& joint) {
  std::vector<std::vector<VertexId>> out;
  for (const auto& p : joint.paths) out.push_back(p.vertices);
  return out;
}

inline JointTrajectory joint_of(const std::vector<std::vector<VertexId>>& paths) {
  JointTrajectory j;
  for (size_t a = 0; a < paths.size(); ++a) j.paths.push_back({static_cast<AgentId>(a), paths[a]});
  return j;
}

}  // namespace testsupport

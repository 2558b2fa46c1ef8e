#include "accbs/low_level.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace accbs {

namespace {

struct OpenEntry {
  Cost f;
  Cost g;
  int step;
  VertexId v;
};

// Heap comparator: the heap top is the entry that should be expanded first.
struct OpenWorse {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    if (a.v != b.v) return a.v > b.v;
    return a.step < b.step;
  }
};

struct SearchScratch {
  std::vector<std::uint32_t> seen;     // stamp: g/parent valid
  std::vector<std::uint32_t> closed;   // stamp: expanded
  std::vector<std::uint32_t> banned;   // stamp: vertex constraint
  std::vector<Cost> g;
  std::vector<VertexId> parent;
  std::vector<std::vector<Edge>> banned_edges;  // per step
  std::vector<OpenEntry> heap;
  std::uint32_t epoch = 0;

  void ensure(size_t states, int steps) {
    if (epoch > 0xF0000000u) {
      std::fill(seen.begin(), seen.end(), 0u);
      std::fill(closed.begin(), closed.end(), 0u);
      std::fill(banned.begin(), banned.end(), 0u);
      epoch = 0;
    }
    if (seen.size() < states) {
      seen.resize(states, 0u);
      closed.resize(states, 0u);
      banned.resize(states, 0u);
      g.resize(states);
      parent.resize(states);
    }
    if (static_cast<int>(banned_edges.size()) < steps) banned_edges.resize(steps);
    for (int t = 0; t < steps; ++t) banned_edges[t].clear();
  }
};

SearchScratch& search_scratch() {
  thread_local SearchScratch s;
  return s;
}

// Extends `out` (ending at its last vertex, step out.size()-1) along a
// shortest path to the goal until it has horizon + 1 vertices.
void append_shortest_suffix(const Graph& graph, const DistanceField& field, int horizon,
                            std::vector<VertexId>& out) {
  while (static_cast<int>(out.size()) <= horizon) {
    const VertexId cur = out.back();
    VertexId next = cur;
    const Cost d = field[cur];
    if (d > 0 && d != kUnreachable) {
      for (VertexId w : graph.neighbors(cur)) {
        if (field[w] == d - 1) {
          next = w;
          break;  // neighbors are sorted: lowest id wins
        }
      }
    }
    out.push_back(next);
  }
}

}  // namespace

int max_constrained_step(AgentId agent, std::span<const Constraint> constraints) {
  int t_star = 0;
  for (const Constraint& c : constraints) {
    if (c.agent == agent) t_star = std::max(t_star, c.last_step());
  }
  return t_star;
}

std::optional<Trajectory> ind_plan(const Graph& graph, const CostModel& model, VertexId start, AgentId agent,
                                   int horizon, std::span<const Constraint> constraints) {
  if (horizon < 1) throw std::invalid_argument("ind_plan: horizon must be >= 1");
  if (!graph.contains(start)) throw std::invalid_argument("ind_plan: start is not a graph vertex");
  const DistanceField& field = *model.fields[agent];
  if (!field.reachable(start)) return std::nullopt;

  const int nv = graph.num_vertices();
  int t_star = 0;
  for (const Constraint& c : constraints) {
    if (c.agent != agent) continue;
    const bool bad_time = c.kind == ConflictKind::kVertex ? (c.time < 0 || c.time > horizon)
                                                          : (c.time < 0 || c.time >= horizon);
    if (bad_time) throw std::invalid_argument("ind_plan: constraint time outside the horizon");
    t_star = std::max(t_star, c.last_step());
  }

  SearchScratch& s = search_scratch();
  s.ensure(static_cast<size_t>(t_star + 1) * nv, t_star + 1);
  const std::uint32_t ep = ++s.epoch;
  auto idx = [nv](int t, VertexId v) { return static_cast<size_t>(t) * nv + v; };
  for (const Constraint& c : constraints) {
    if (c.agent != agent) continue;
    if (c.kind == ConflictKind::kVertex) {
      if (graph.contains(c.from)) s.banned[idx(c.time, c.from)] = ep;
    } else {
      s.banned_edges[c.time].push_back({c.from, c.to});
    }
  }
  auto edge_banned = [&](int t, VertexId u, VertexId w) {
    const auto& list = s.banned_edges[t];
    return std::find(list.begin(), list.end(), Edge{u, w}) != list.end();
  };

  if (s.banned[idx(0, start)] == ep) return std::nullopt;

  Trajectory traj;
  traj.agent = agent;
  traj.vertices.reserve(horizon + 1);
  if (t_star == 0) {
    traj.vertices.push_back(start);
    append_shortest_suffix(graph, field, horizon, traj.vertices);
    return traj;
  }

  auto& open = s.heap;
  open.clear();
  auto push = [&open](OpenEntry e) {
    open.push_back(e);
    std::push_heap(open.begin(), open.end(), OpenWorse{});
  };
  s.seen[idx(0, start)] = ep;
  s.g[idx(0, start)] = 0;
  s.parent[idx(0, start)] = kNoVertex;
  push({field[start], 0, 0, start});

  std::optional<Trajectory> result;
  while (!open.empty()) {
    std::pop_heap(open.begin(), open.end(), OpenWorse{});
    const OpenEntry top = open.back();
    open.pop_back();
    const size_t here = idx(top.step, top.v);
    if (s.closed[here] == ep) continue;
    s.closed[here] = ep;

    if (top.step == t_star) {
      traj.vertices.assign(t_star + 1, kNoVertex);
      VertexId v = top.v;
      for (int t = t_star; t >= 0; --t) {
        traj.vertices[t] = v;
        v = s.parent[idx(t, v)];
      }
      append_shortest_suffix(graph, field, horizon, traj.vertices);
      result = std::move(traj);
      break;
    }

    const Cost ng = top.g + model.stage(agent, top.v);
    const int nt = top.step + 1;
    auto relax = [&](VertexId w) {
      const size_t there = idx(nt, w);
      if (s.banned[there] == ep || s.closed[there] == ep) return;
      if (!field.reachable(w) || edge_banned(top.step, top.v, w)) return;
      if (s.seen[there] == ep && s.g[there] <= ng) return;
      s.seen[there] = ep;
      s.g[there] = ng;
      s.parent[there] = top.v;
      push({ng + field[w], ng, nt, w});
    };
    relax(top.v);
    for (VertexId w : graph.neighbors(top.v)) relax(w);
  }
  return result;
}

std::optional<JointTrajectory> plan_all(const Graph& graph, const CostModel& model, const State& state, int horizon,
                                        std::span<const Constraint> constraints) {
  JointTrajectory joint;
  joint.paths.reserve(state.positions.size());
  for (AgentId a = 0; a < state.num_agents(); ++a) {
    auto traj = ind_plan(graph, model, state.positions[a], a, horizon, constraints);
    if (!traj) return std::nullopt;
    joint.paths.push_back(std::move(*traj));
  }
  return joint;
}

std::optional<JointTrajectory> replan_agents(const Graph& graph, const CostModel& model, const State& state,
                                             int horizon, std::span<const Constraint> constraints,
                                             const JointTrajectory& parent, std::span<const AgentId> agents) {
  JointTrajectory joint = parent;
  for (AgentId a : agents) {
    auto traj = ind_plan(graph, model, state.positions[a], a, horizon, constraints);
    if (!traj) return std::nullopt;
    joint.paths[a] = std::move(*traj);
  }
  return joint;
}

}  // namespace accbs

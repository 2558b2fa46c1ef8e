#include "accbs/model.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace accbs {

State initial_state(const Instance& instance) {
  State s;
  s.positions = instance.starts();
  s.time = 0;
  return s;
}

bool MovementCommand::all_wait() const {
  return std::all_of(moves.begin(), moves.end(), [](const Edge& e) { return e.is_wait(); });
}

std::vector<VertexId> MovementCommand::targets() const {
  std::vector<VertexId> out;
  out.reserve(moves.size());
  for (const Edge& e : moves) out.push_back(e.to);
  return out;
}

Constraint Constraint::vertex(AgentId agent, int time, VertexId v) {
  if (time < 0) throw std::invalid_argument("vertex constraint time must be >= 0");
  return {ConflictKind::kVertex, agent, time, v, v};
}

Constraint Constraint::edge(AgentId agent, int time, VertexId u, VertexId w) {
  if (time < 0) throw std::invalid_argument("edge constraint time must be >= 0");
  return {ConflictKind::kEdge, agent, time, u, w};
}

std::string Conflict::describe() const {
  std::ostringstream os;
  if (kind == ConflictKind::kVertex) {
    os << "vertex conflict a" << first << "/a" << second << " at v" << u << " t=" << time;
  } else {
    os << "edge conflict a" << first << "(v" << u << "->v" << w << ")/a" << second << " t=" << time;
  }
  return os.str();
}

CostModel make_cost_model(const Instance& instance) {
  CostModel model;
  model.goals = instance.goals();
  model.fields.reserve(instance.agents.size());
  for (VertexId g : model.goals) model.fields.push_back(instance.distances->get(g));
  return model;
}

namespace {

enum class ScanMode { kFirst, kAll, kCount };

// Per-thread occupancy tables, stamped so they never need clearing. Two
// generations (current and previous step) are kept for swap detection.
struct Scratch {
  std::array<std::vector<std::uint32_t>, 2> stamp;
  std::array<std::vector<int>, 2> head;
  std::array<std::vector<int>, 2> next;
  std::uint32_t epoch = 0;
  std::vector<Conflict> vertex_hits;
  std::vector<Conflict> edge_hits;

  void ensure(size_t vertices, size_t agents) {
    if (epoch > 0xF0000000u) {
      for (auto& s : stamp) std::fill(s.begin(), s.end(), 0u);
      epoch = 0;
    }
    for (int k = 0; k < 2; ++k) {
      if (stamp[k].size() < vertices) {
        stamp[k].resize(vertices, 0u);
        head[k].resize(vertices, -1);
      }
      if (next[k].size() < agents) next[k].resize(agents, -1);
    }
  }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

bool pair_less(const Conflict& a, const Conflict& b) {
  return std::tie(a.first, a.second) < std::tie(b.first, b.second);
}

struct ScanResult {
  std::vector<Conflict> conflicts;
  int count = 0;
};

ScanResult scan(PathSpans paths, int horizon, ScanMode mode) {
  ScanResult result;
  const int n = static_cast<int>(paths.size());
  if (n == 0) return result;
  if (horizon < 0) throw std::invalid_argument("conflict scan horizon must be >= 0");
  VertexId max_vertex = 0;
  for (const auto& p : paths) {
    if (static_cast<int>(p.size()) <= horizon) {
      throw std::invalid_argument("conflict scan horizon exceeds trajectory length");
    }
    for (int t = 0; t <= horizon; ++t) max_vertex = std::max(max_vertex, p[t]);
  }
  if (n < 2) return result;

  Scratch& s = scratch();
  s.ensure(static_cast<size_t>(max_vertex) + 1, static_cast<size_t>(n));
  int cur = 0;
  for (int t = 0; t <= horizon; ++t) {
    const std::uint32_t ep = ++s.epoch;
    auto& stamp = s.stamp[cur];
    auto& head = s.head[cur];
    auto& next = s.next[cur];
    s.vertex_hits.clear();
    s.edge_hits.clear();

    for (int j = 0; j < n; ++j) {
      const VertexId v = paths[j][t];
      if (stamp[v] != ep) {
        stamp[v] = ep;
        head[v] = j;
        next[j] = -1;
        continue;
      }
      for (int k = head[v]; k != -1; k = next[k]) {
        if (mode == ScanMode::kCount) {
          ++result.count;
        } else {
          s.vertex_hits.push_back({ConflictKind::kVertex, k, j, t, v, v});
        }
      }
      next[j] = head[v];
      head[v] = j;
    }

    if (t >= 1) {
      const int prev = 1 - cur;
      const std::uint32_t ep_prev = ep - 1;
      const auto& pstamp = s.stamp[prev];
      const auto& phead = s.head[prev];
      const auto& pnext = s.next[prev];
      for (int i = 0; i < n; ++i) {
        const VertexId u = paths[i][t - 1];
        const VertexId w = paths[i][t];
        if (u == w || pstamp[w] != ep_prev) continue;
        for (int k = phead[w]; k != -1; k = pnext[k]) {
          if (k > i && paths[k][t] == u) {
            if (mode == ScanMode::kCount) {
              ++result.count;
            } else {
              s.edge_hits.push_back({ConflictKind::kEdge, i, k, t, u, w});
            }
          }
        }
      }
    }

    if (mode == ScanMode::kFirst) {
      if (!s.vertex_hits.empty()) {
        result.conflicts.push_back(*std::min_element(s.vertex_hits.begin(), s.vertex_hits.end(), pair_less));
        return result;
      }
      if (!s.edge_hits.empty()) {
        result.conflicts.push_back(*std::min_element(s.edge_hits.begin(), s.edge_hits.end(), pair_less));
        return result;
      }
    } else if (mode == ScanMode::kAll) {
      std::sort(s.vertex_hits.begin(), s.vertex_hits.end(), pair_less);
      std::sort(s.edge_hits.begin(), s.edge_hits.end(), pair_less);
      result.conflicts.insert(result.conflicts.end(), s.vertex_hits.begin(), s.vertex_hits.end());
      result.conflicts.insert(result.conflicts.end(), s.edge_hits.begin(), s.edge_hits.end());
    }
    cur = 1 - cur;
  }
  return result;
}

std::vector<std::span<const VertexId>> spans_of(const JointTrajectory& joint) {
  std::vector<std::span<const VertexId>> spans;
  spans.reserve(joint.paths.size());
  for (const auto& p : joint.paths) spans.emplace_back(p.vertices);
  return spans;
}

}  // namespace

std::optional<Conflict> find_conflict(PathSpans paths, int horizon) {
  auto r = scan(paths, horizon, ScanMode::kFirst);
  if (r.conflicts.empty()) return std::nullopt;
  return r.conflicts.front();
}

std::vector<Conflict> list_conflicts(PathSpans paths, int horizon) {
  return scan(paths, horizon, ScanMode::kAll).conflicts;
}

int count_conflicts(PathSpans paths, int horizon) { return scan(paths, horizon, ScanMode::kCount).count; }

std::optional<Conflict> find_conflict(const JointTrajectory& joint, int horizon) {
  auto spans = spans_of(joint);
  return find_conflict(PathSpans(spans), horizon);
}

std::vector<Conflict> list_conflicts(const JointTrajectory& joint, int horizon) {
  auto spans = spans_of(joint);
  return list_conflicts(PathSpans(spans), horizon);
}

int count_conflicts(const JointTrajectory& joint, int horizon) {
  auto spans = spans_of(joint);
  return count_conflicts(PathSpans(spans), horizon);
}

Cost trajectory_cost(const Trajectory& traj, const CostModel& model) {
  const int H = traj.horizon();
  if (H < 0) throw std::invalid_argument("trajectory_cost: empty trajectory");
  Cost total = 0;
  for (int l = 0; l < H; ++l) total += model.stage(traj.agent, traj.vertices[l]);
  const Cost tail = model.terminal(traj.agent, traj.vertices[H]);
  if (tail == kUnreachable) throw std::domain_error("trajectory_cost: final vertex cannot reach the goal");
  return total + tail;
}

Cost prefix_cost(const JointTrajectory& joint, const CostModel& model, int h) {
  if (h < 1 || h > joint.horizon()) throw std::invalid_argument("prefix_cost: h outside [1, H]");
  Cost total = 0;
  for (const Trajectory& traj : joint.paths) {
    for (int l = 0; l < h; ++l) total += model.stage(traj.agent, traj.vertices[l]);
    const Cost tail = model.terminal(traj.agent, traj.vertices[h]);
    if (tail == kUnreachable) throw std::domain_error("prefix_cost: vertex cannot reach the goal");
    total += tail;
  }
  return total;
}

bool satisfies(const Trajectory& traj, std::span<const Constraint> constraints) {
  const int H = traj.horizon();
  for (const Constraint& c : constraints) {
    if (c.agent != traj.agent) continue;
    if (c.kind == ConflictKind::kVertex) {
      if (c.time <= H && traj.vertices[c.time] == c.from) return false;
    } else {
      if (c.time < H && traj.vertices[c.time] == c.from && traj.vertices[c.time + 1] == c.to) return false;
    }
  }
  return true;
}

std::optional<Conflict> transition_conflict(std::span<const VertexId> from, std::span<const VertexId> to) {
  if (from.size() != to.size()) throw std::invalid_argument("transition_conflict: size mismatch");
  std::vector<std::array<VertexId, 2>> steps(from.size());
  std::vector<std::span<const VertexId>> spans;
  spans.reserve(from.size());
  for (size_t i = 0; i < from.size(); ++i) {
    steps[i] = {from[i], to[i]};
    spans.emplace_back(steps[i]);
  }
  return find_conflict(PathSpans(spans), 1);
}

}  // namespace accbs

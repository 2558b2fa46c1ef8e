#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "accbs/distance.hpp"
#include "accbs/instance.hpp"
#include "accbs/types.hpp"

namespace accbs {

// Closed-loop state x_t: positions indexed by agent id.
struct State {
  std::vector<VertexId> positions;
  int time = 0;

  int num_agents() const { return static_cast<int>(positions.size()); }
  friend bool operator==(const State&, const State&) = default;
};

State initial_state(const Instance& instance);

// Joint movement command u_t; moves[a].from is agent a's current vertex.
struct MovementCommand {
  std::vector<Edge> moves;

  bool all_wait() const;
  std::vector<VertexId> targets() const;
  friend bool operator==(const MovementCommand&, const MovementCommand&) = default;
};

struct Trajectory {
  AgentId agent = 0;
  std::vector<VertexId> vertices;  // v_0 .. v_H

  int horizon() const { return static_cast<int>(vertices.size()) - 1; }
  VertexId at(int t) const { return vertices[t]; }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct JointTrajectory {
  std::vector<Trajectory> paths;  // indexed by agent id, uniform horizon

  int num_agents() const { return static_cast<int>(paths.size()); }
  int horizon() const { return paths.empty() ? 0 : paths.front().horizon(); }
  friend bool operator==(const JointTrajectory&, const JointTrajectory&) = default;
};

enum class ConflictKind { kVertex, kEdge };

/// Vertex constraint <agent, t, v> bans being at v at step t (t in [0, H]).
/// Edge constraint <agent, t, (u, w)> bans traversing u -> w from step t to
/// t + 1 (t in [0, H - 1]).
struct Constraint {
  ConflictKind kind = ConflictKind::kVertex;
  AgentId agent = 0;
  int time = 0;
  VertexId from = kNoVertex;  // the vertex, for vertex constraints
  VertexId to = kNoVertex;    // unused (== from) for vertex constraints

  static Constraint vertex(AgentId agent, int time, VertexId v);
  static Constraint edge(AgentId agent, int time, VertexId u, VertexId w);

  // Largest step index this constraint restricts.
  int last_step() const { return kind == ConflictKind::kVertex ? time : time + 1; }
  friend bool operator==(const Constraint&, const Constraint&) = default;
  friend auto operator<=>(const Constraint&, const Constraint&) = default;
};

/// For edge conflicts, `first` traverses (u -> w) and `second` (w -> u)
/// during the transition that ends at `time`.
struct Conflict {
  ConflictKind kind = ConflictKind::kVertex;
  AgentId first = 0;
  AgentId second = 0;
  int time = 0;
  VertexId u = kNoVertex;  // the shared vertex for vertex conflicts
  VertexId w = kNoVertex;

  std::string describe() const;
  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Stage cost p (1 off-goal, 0 at goal) and terminal cost q = gamma per agent.
struct CostModel {
  std::vector<VertexId> goals;
  std::vector<std::shared_ptr<const DistanceField>> fields;

  int num_agents() const { return static_cast<int>(goals.size()); }
  Cost stage(AgentId a, VertexId v) const { return v == goals[a] ? 0 : 1; }
  Cost terminal(AgentId a, VertexId v) const { return (*fields[a])[v]; }
};

CostModel make_cost_model(const Instance& instance);

/// Earliest conflict in the active prefix: vertex conflicts at t in [0, h],
/// edge conflicts on transitions ending at t in [1, h]. At equal time vertex
/// conflicts come first, then the lexicographically smallest agent pair.
std::optional<Conflict> find_conflict(const JointTrajectory& joint, int horizon);

// All conflicts in the active prefix, in find_conflict's order.
std::vector<Conflict> list_conflicts(const JointTrajectory& joint, int horizon);

// Number of conflicting (pair, step) incidences in the active prefix.
int count_conflicts(const JointTrajectory& joint, int horizon);

// Same queries over borrowed per-agent vertex sequences (index = agent id).
using PathSpans = std::span<const std::span<const VertexId>>;
std::optional<Conflict> find_conflict(PathSpans paths, int horizon);
std::vector<Conflict> list_conflicts(PathSpans paths, int horizon);
int count_conflicts(PathSpans paths, int horizon);

/// Throws std::domain_error when the final vertex cannot reach the goal.
Cost trajectory_cost(const Trajectory& traj, const CostModel& model);

// J_h: running cost over [0, h) plus gamma at v_h, summed over agents.
Cost prefix_cost(const JointTrajectory& joint, const CostModel& model, int h);

bool satisfies(const Trajectory& traj, std::span<const Constraint> constraints);

// Checks a single joint transition for shared targets or swaps.
std::optional<Conflict> transition_conflict(std::span<const VertexId> from, std::span<const VertexId> to);

}  // namespace accbs

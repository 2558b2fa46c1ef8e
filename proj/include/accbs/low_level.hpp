#pragma once

#include <optional>
#include <span>

#include "accbs/grid.hpp"
#include "accbs/model.hpp"

namespace accbs {

/// Constrained single-agent planner.
///
/// Returns a minimum-cost trajectory of exactly `horizon` steps from `start`
/// that satisfies every constraint addressed to `agent` (others are ignored).
/// Space-time best-first search runs only up to T*, the largest step index any
/// constraint touches; from (v, T*) the remaining cost is exactly gamma(v), so
/// the trajectory is closed out with a shortest path to the goal followed by
/// waiting there. Every returned trajectory therefore satisfies
/// gamma(v[l+1]) == max(gamma(v[l]) - 1, 0) for all l >= T*.
///
/// Ties: open-list order is (f asc, g desc, vertex asc, step desc); the
/// shortest-path suffix steps to the lowest-id neighbor one closer to the goal.
///
/// std::nullopt when no satisfying trajectory exists. Throws
/// std::invalid_argument for constraint times outside the horizon.
std::optional<Trajectory> ind_plan(const Graph& graph, const CostModel& model, VertexId start, AgentId agent,
                                   int horizon, std::span<const Constraint> constraints);

// Largest step index restricted by the constraints addressed to `agent`.
int max_constrained_step(AgentId agent, std::span<const Constraint> constraints);

// Plans every agent independently under its share of `constraints`.
std::optional<JointTrajectory> plan_all(const Graph& graph, const CostModel& model, const State& state, int horizon,
                                        std::span<const Constraint> constraints);

// Incremental variant: copies `parent` and replans only `agents`.
std::optional<JointTrajectory> replan_agents(const Graph& graph, const CostModel& model, const State& state,
                                             int horizon, std::span<const Constraint> constraints,
                                             const JointTrajectory& parent, std::span<const AgentId> agents);

}  // namespace accbs

#pragma once

#include <vector>

#include "accbs/model.hpp"

namespace accbs {

/// Dynamic PIBT priorities: agents that have gone longer without reaching
/// their goal move first; lower id wins ties.
struct PriorityTable {
  std::vector<int> elapsed;  // steps since the agent last stood on its goal

  static PriorityTable uniform(int num_agents) { return {std::vector<int>(num_agents, 0)}; }

  bool precedes(AgentId a, AgentId b) const {
    if (elapsed[a] != elapsed[b]) return elapsed[a] > elapsed[b];
    return a < b;
  }
  std::vector<AgentId> order() const;

  // Bookkeeping after a step executes; grows the table for new arrivals.
  void update(const State& state, const std::vector<VertexId>& goals);
};

/// One step of priority inheritance with backtracking. Candidates are tried in
/// ascending gamma (lower vertex id on ties); the resulting joint move is free
/// of shared targets and swaps.
MovementCommand pibt_step(const Graph& graph, const CostModel& model, const State& state,
                          const PriorityTable& priorities);

}  // namespace accbs

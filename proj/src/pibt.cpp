#include "accbs/pibt.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace accbs {

std::vector<AgentId> PriorityTable::order() const {
  std::vector<AgentId> ids(elapsed.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [this](AgentId a, AgentId b) { return precedes(a, b); });
  return ids;
}

void PriorityTable::update(const State& state, const std::vector<VertexId>& goals) {
  if (elapsed.size() < state.positions.size()) elapsed.resize(state.positions.size(), 0);
  for (size_t a = 0; a < state.positions.size(); ++a) {
    elapsed[a] = state.positions[a] == goals[a] ? 0 : elapsed[a] + 1;
  }
}

namespace {

class Pibt {
 public:
  Pibt(const Graph& graph, const CostModel& model, const State& state)
      : graph_(graph),
        model_(model),
        state_(state),
        occupied_now_(graph.num_vertices(), -1),
        occupied_next_(graph.num_vertices(), -1),
        next_(state.positions.size(), kNoVertex) {
    for (AgentId a = 0; a < state.num_agents(); ++a) occupied_now_[state.positions[a]] = a;
  }

  MovementCommand run(const PriorityTable& priorities) {
    for (AgentId a : priorities.order()) {
      if (next_[a] == kNoVertex) plan(a, -1);
    }
    MovementCommand cmd;
    cmd.moves.reserve(next_.size());
    for (AgentId a = 0; a < state_.num_agents(); ++a) cmd.moves.push_back({state_.positions[a], next_[a]});
    return cmd;
  }

 private:
  // Returns false when `a` could not move and stays put.
  bool plan(AgentId a, AgentId parent) {
    const VertexId here = state_.positions[a];
    std::vector<VertexId> candidates(graph_.neighbors(here).begin(), graph_.neighbors(here).end());
    candidates.push_back(here);
    const DistanceField& field = *model_.fields[a];
    std::sort(candidates.begin(), candidates.end(), [&](VertexId x, VertexId y) {
      if (field[x] != field[y]) return field[x] < field[y];
      return x < y;
    });

    for (VertexId u : candidates) {
      if (occupied_next_[u] != -1) continue;
      if (parent != -1 && state_.positions[parent] == u) continue;  // no swap with the pusher
      occupied_next_[u] = a;
      next_[a] = u;
      const AgentId other = occupied_now_[u];
      if (other != -1 && other != a && next_[other] == kNoVertex) {
        if (!plan(other, a)) continue;
      }
      return true;
    }
    occupied_next_[here] = a;
    next_[a] = here;
    return false;
  }

  const Graph& graph_;
  const CostModel& model_;
  const State& state_;
  std::vector<AgentId> occupied_now_;
  std::vector<AgentId> occupied_next_;
  std::vector<VertexId> next_;
};

}  // namespace

MovementCommand pibt_step(const Graph& graph, const CostModel& model, const State& state,
                          const PriorityTable& priorities) {
  if (priorities.elapsed.size() != state.positions.size()) {
    throw std::invalid_argument("pibt_step: priority table size does not match the agent count");
  }
  return Pibt(graph, model, state).run(priorities);
}

}  // namespace accbs

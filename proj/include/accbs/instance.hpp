#pragma once

#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include "accbs/distance.hpp"
#include "accbs/grid.hpp"
#include "accbs/rng.hpp"

namespace accbs {

struct AgentSpec {
  AgentId id = 0;
  VertexId start = kNoVertex;
  VertexId goal = kNoVertex;
  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// A MAPF instance: shared graph, its distance-field cache, and the agents in
/// id order. Agent ids equal their index in `agents`.
struct Instance {
  std::shared_ptr<const Graph> graph;
  std::shared_ptr<DistanceCache> distances;
  std::vector<AgentSpec> agents;

  int num_agents() const { return static_cast<int>(agents.size()); }
  std::vector<VertexId> starts() const;
  std::vector<VertexId> goals() const;
};

// Shares one distance cache per graph.
Instance make_instance(std::shared_ptr<const Graph> graph, std::vector<AgentSpec> agents);

/// MovingAI .scen rows: `bucket map width height sx sy gx gy optimal`, with
/// (x, y) = (col, row). Converted to graph vertices here; the `optimal` column
/// is read and discarded.
std::vector<AgentSpec> parse_scen(std::string_view text, int count, const Graph& graph);
std::vector<AgentSpec> load_scen(const std::filesystem::path& path, int count, const Graph& graph);

/// Throws std::invalid_argument naming the violated invariant. `distinct_goals`
/// is required for one-shot instances only.
void validate_instance(const Instance& instance, bool distinct_goals = true);

/// Seeded random one-shot agents: pairwise-distinct starts and goals, each
/// goal reachable from its start.
std::vector<AgentSpec> random_agents(const Graph& graph, int count, Rng& rng);

}  // namespace accbs

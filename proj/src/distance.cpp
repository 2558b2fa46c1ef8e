#include "accbs/distance.hpp"

#include <queue>
#include <stdexcept>

namespace accbs {

DistanceField distance_field(const Graph& graph, VertexId goal) {
  if (!graph.contains(goal)) throw std::invalid_argument("distance_field: goal is not a graph vertex");
  DistanceField field;
  field.goal = goal;
  field.dist.assign(graph.num_vertices(), kUnreachable);
  field.dist[goal] = 0;
  // Edges are symmetric apart from self-loops, so a forward BFS from the goal
  // yields distances to the goal.
  std::queue<VertexId> q;
  q.push(goal);
  while (!q.empty()) {
    VertexId u = q.front();
    q.pop();
    for (VertexId w : graph.neighbors(u)) {
      if (field.dist[w] == kUnreachable) {
        field.dist[w] = field.dist[u] + 1;
        q.push(w);
      }
    }
  }
  return field;
}

std::shared_ptr<const DistanceField> DistanceCache::get(VertexId goal) {
  {
    std::lock_guard lock(mu_);
    auto it = fields_.find(goal);
    if (it != fields_.end()) return it->second;
  }
  auto field = std::make_shared<const DistanceField>(distance_field(*graph_, goal));
  std::lock_guard lock(mu_);
  return fields_.emplace(goal, std::move(field)).first->second;
}

size_t DistanceCache::size() const {
  std::lock_guard lock(mu_);
  return fields_.size();
}

}  // namespace accbs

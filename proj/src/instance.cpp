#include "accbs/instance.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace accbs {

std::vector<VertexId> Instance::starts() const {
  std::vector<VertexId> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.start);
  return out;
}

std::vector<VertexId> Instance::goals() const {
  std::vector<VertexId> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.goal);
  return out;
}

Instance make_instance(std::shared_ptr<const Graph> graph, std::vector<AgentSpec> agents) {
  Instance inst;
  inst.distances = std::make_shared<DistanceCache>(graph);
  inst.graph = std::move(graph);
  inst.agents = std::move(agents);
  return inst;
}

std::vector<AgentSpec> parse_scen(std::string_view text, int count, const Graph& graph) {
  if (count <= 0) throw std::invalid_argument("scenario agent count must be positive");
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty scenario file");
  ++lineno;
  if (!line.starts_with("version")) throw ParseError(1, "expected 'version' header");

  std::vector<AgentSpec> agents;
  while (static_cast<int>(agents.size()) < count && std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream row(line);
    long bucket = 0, w = 0, h = 0, sx = 0, sy = 0, gx = 0, gy = 0;
    double optimal = 0;
    std::string map_name;
    if (!(row >> bucket >> map_name >> w >> h >> sx >> sy >> gx >> gy >> optimal)) {
      throw ParseError(lineno, "malformed scenario row");
    }
    auto to_vertex = [&](long x, long y, const char* what) {
      if (x < 0 || y < 0 || x >= graph.width() || y >= graph.height()) {
        throw ParseError(lineno, std::string(what) + " coordinates outside map");
      }
      VertexId v = graph.vertex_at(static_cast<int>(y), static_cast<int>(x));
      if (v == kNoVertex) throw ParseError(lineno, std::string(what) + " on blocked cell");
      return v;
    };
    AgentSpec spec;
    spec.id = static_cast<AgentId>(agents.size());
    spec.start = to_vertex(sx, sy, "start");
    spec.goal = to_vertex(gx, gy, "goal");
    agents.push_back(spec);
  }
  if (static_cast<int>(agents.size()) < count) {
    throw ParseError(0, "insufficient scenarios: requested " + std::to_string(count) + ", found " +
                            std::to_string(agents.size()));
  }
  return agents;
}

std::vector<AgentSpec> load_scen(const std::filesystem::path& path, int count, const Graph& graph) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scen(buf.str(), count, graph);
}

void validate_instance(const Instance& instance, bool distinct_goals) {
  if (!instance.graph || !instance.distances) throw std::invalid_argument("instance has no graph");
  const Graph& g = *instance.graph;
  std::unordered_set<VertexId> starts, goals;
  for (size_t i = 0; i < instance.agents.size(); ++i) {
    const AgentSpec& a = instance.agents[i];
    if (a.id != static_cast<AgentId>(i)) throw std::invalid_argument("agent ids must be 0..N-1 in order");
    if (!g.contains(a.start) || !g.contains(a.goal)) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + ": start or goal is not a vertex");
    }
    if (!starts.insert(a.start).second) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + ": duplicate start vertex");
    }
    if (distinct_goals && !goals.insert(a.goal).second) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + ": duplicate goal vertex");
    }
    if (g.component(a.start) != g.component(a.goal)) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + ": goal unreachable from start");
    }
  }
}

std::vector<AgentSpec> random_agents(const Graph& graph, int count, Rng& rng) {
  const int n = graph.num_vertices();
  if (count <= 0 || count > n) throw std::invalid_argument("random_agents: count out of range");

  // Fisher-Yates with the portable index draw.
  auto shuffled = [&] {
    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
    }
    return order;
  };

  std::vector<VertexId> start_order = shuffled();
  std::vector<VertexId> goal_order = shuffled();
  std::vector<bool> goal_taken(n, false);
  std::vector<AgentSpec> agents;
  for (VertexId s : start_order) {
    if (static_cast<int>(agents.size()) == count) break;
    auto it = std::find_if(goal_order.begin(), goal_order.end(), [&](VertexId v) {
      return !goal_taken[v] && graph.component(v) == graph.component(s);
    });
    if (it == goal_order.end()) continue;
    goal_taken[*it] = true;
    agents.push_back({static_cast<AgentId>(agents.size()), s, *it});
  }
  if (static_cast<int>(agents.size()) < count) {
    throw std::invalid_argument("random_agents: not enough connected start/goal pairs");
  }
  return agents;
}

}  // namespace accbs

#include "accbs/oracles.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>

#include "accbs/low_level.hpp"

namespace accbs {

namespace {

struct OracleNode {
  std::vector<Constraint> constraints;
  std::vector<Trajectory> paths;
  Cost cost = 0;
};

// Plain pairwise scan, earliest time first.
std::optional<Conflict> first_conflict(const std::vector<Trajectory>& paths) {
  const int H = paths.front().horizon();
  const int n = static_cast<int>(paths.size());
  for (int t = 0; t <= H; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (paths[i].vertices[t] == paths[j].vertices[t]) {
          return Conflict{ConflictKind::kVertex, i, j, t, paths[i].vertices[t], paths[i].vertices[t]};
        }
      }
    }
    if (t == 0) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const VertexId u = paths[i].vertices[t - 1], w = paths[i].vertices[t];
        if (u != w && paths[j].vertices[t - 1] == w && paths[j].vertices[t] == u) {
          return Conflict{ConflictKind::kEdge, i, j, t, u, w};
        }
      }
    }
  }
  return std::nullopt;
}

int makespan_of(const std::vector<Trajectory>& paths, const CostModel& model) {
  int makespan = 0;
  for (const auto& p : paths) {
    for (int t = p.horizon(); t >= 0; --t) {
      if (p.vertices[t] != model.goals[p.agent]) {
        makespan = std::max(makespan, t + 1);
        break;
      }
    }
  }
  return makespan;
}

}  // namespace

OracleSolution classic_cbs(const Instance& instance, std::int64_t node_limit) {
  const Graph& graph = *instance.graph;
  const CostModel model = make_cost_model(instance);
  const State state = initial_state(instance);
  const int H = graph.num_vertices() + instance.num_agents();

  std::vector<OracleNode> nodes;
  OracleNode root;
  for (AgentId a = 0; a < instance.num_agents(); ++a) {
    auto traj = ind_plan(graph, model, state.positions[a], a, H, {});
    if (!traj) throw std::runtime_error("classic_cbs: agent has no path to its goal");
    root.cost += trajectory_cost(*traj, model);
    root.paths.push_back(std::move(*traj));
  }
  nodes.push_back(std::move(root));

  using Key = std::pair<Cost, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> open;
  open.emplace(nodes[0].cost, 0);
  std::int64_t expansions = 0;
  while (!open.empty()) {
    if (expansions >= node_limit) throw OracleTimeout("oracle timeout");
    const int id = open.top().second;
    open.pop();
    ++expansions;
    auto conflict = first_conflict(nodes[id].paths);
    if (!conflict) {
      OracleSolution sol;
      sol.soc = nodes[id].cost;
      sol.makespan = makespan_of(nodes[id].paths, model);
      for (auto p : nodes[id].paths) {
        p.vertices.resize(sol.makespan + 1);
        sol.joint.paths.push_back(std::move(p));
      }
      return sol;
    }
    std::vector<Constraint> split;
    if (conflict->kind == ConflictKind::kVertex) {
      split = {Constraint::vertex(conflict->first, conflict->time, conflict->u),
               Constraint::vertex(conflict->second, conflict->time, conflict->u)};
    } else {
      split = {Constraint::edge(conflict->first, conflict->time - 1, conflict->u, conflict->w),
               Constraint::edge(conflict->second, conflict->time - 1, conflict->w, conflict->u)};
    }
    for (const Constraint& c : split) {
      OracleNode child;
      child.constraints = nodes[id].constraints;
      child.constraints.push_back(c);
      auto traj = ind_plan(graph, model, state.positions[c.agent], c.agent, H, child.constraints);
      if (!traj) continue;
      child.paths = nodes[id].paths;
      child.cost = nodes[id].cost - trajectory_cost(child.paths[c.agent], model) + trajectory_cost(*traj, model);
      child.paths[c.agent] = std::move(*traj);
      nodes.push_back(std::move(child));
      open.emplace(nodes.back().cost, static_cast<int>(nodes.size()) - 1);
    }
  }
  throw std::runtime_error("classic_cbs: instance has no solution");
}

std::optional<std::pair<JointTrajectory, Cost>> brute_force_joint(const Instance& instance, int horizon) {
  return brute_force_joint(instance, initial_state(instance), horizon);
}

std::optional<std::pair<JointTrajectory, Cost>> brute_force_joint(const Instance& instance, const State& state,
                                                                  int horizon) {
  const Graph& graph = *instance.graph;
  const int n = instance.num_agents();
  const int nv = graph.num_vertices();
  if (n < 1 || n > 3 || nv > 16 || horizon < 1 || horizon > 6) {
    throw std::invalid_argument("brute_force_joint: requires N <= 3, |V| <= 16, 1 <= H <= 6");
  }
  const CostModel model = make_cost_model(instance);

  int configs = 1;
  for (int a = 0; a < n; ++a) configs *= nv;
  auto decode = [&](int code) {
    std::vector<VertexId> pos(n);
    for (int a = 0; a < n; ++a) {
      pos[a] = code % nv;
      code /= nv;
    }
    return pos;
  };
  auto encode = [&](const std::vector<VertexId>& pos) {
    int code = 0;
    for (int a = n - 1; a >= 0; --a) code = code * nv + pos[a];
    return code;
  };
  auto distinct = [&](const std::vector<VertexId>& pos) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (pos[i] == pos[j]) return false;
    return true;
  };

  constexpr Cost kInf = kUnreachable;
  // best[t][code]: minimum cost from configuration `code` at step t.
  std::vector<std::vector<Cost>> best(horizon + 1, std::vector<Cost>(configs, kInf));
  std::vector<std::vector<int>> choice(horizon, std::vector<int>(configs, -1));
  for (int code = 0; code < configs; ++code) {
    auto pos = decode(code);
    if (!distinct(pos)) continue;
    Cost total = 0;
    for (int a = 0; a < n && total != kInf; ++a) {
      const Cost q = model.terminal(a, pos[a]);
      total = q == kUnreachable ? kInf : total + q;
    }
    best[horizon][code] = total;
  }

  for (int t = horizon - 1; t >= 0; --t) {
    for (int code = 0; code < configs; ++code) {
      auto pos = decode(code);
      if (!distinct(pos)) continue;
      Cost stage = 0;
      for (int a = 0; a < n; ++a) stage += model.stage(a, pos[a]);
      std::vector<std::vector<VertexId>> options(n);
      for (int a = 0; a < n; ++a) {
        options[a].push_back(pos[a]);
        for (VertexId w : graph.neighbors(pos[a])) options[a].push_back(w);
      }
      std::vector<VertexId> next(n);
      std::vector<size_t> idx(n, 0);
      // Odometer over the product of per-agent options.
      while (true) {
        for (int a = 0; a < n; ++a) next[a] = options[a][idx[a]];
        bool ok = distinct(next);
        for (int i = 0; ok && i < n; ++i)
          for (int j = i + 1; ok && j < n; ++j)
            if (next[i] == pos[j] && next[j] == pos[i] && pos[i] != next[i]) ok = false;
        if (ok) {
          const int nc = encode(next);
          if (best[t + 1][nc] != kInf && stage + best[t + 1][nc] < best[t][code]) {
            best[t][code] = stage + best[t + 1][nc];
            choice[t][code] = nc;
          }
        }
        int a = 0;
        while (a < n && ++idx[a] == options[a].size()) idx[a++] = 0;
        if (a == n) break;
      }
    }
  }

  if (state.num_agents() != n) throw std::invalid_argument("brute_force_joint: state size mismatch");
  if (!distinct(state.positions)) return std::nullopt;
  int code = encode(state.positions);
  if (best[0][code] == kInf) return std::nullopt;
  const Cost cost = best[0][code];
  JointTrajectory joint;
  joint.paths.resize(n);
  for (int a = 0; a < n; ++a) joint.paths[a].agent = a;
  for (int t = 0; t <= horizon; ++t) {
    auto pos = decode(code);
    for (int a = 0; a < n; ++a) joint.paths[a].vertices.push_back(pos[a]);
    if (t < horizon) code = choice[t][code];
  }
  return std::make_pair(std::move(joint), cost);
}

std::vector<OracleRecord> read_oracle_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open oracle fixture " + path.string());
  std::vector<OracleRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    OracleRecord r;
    if (!std::getline(row, r.map_id, '\t') || !std::getline(row, r.scen_id, '\t') ||
        !(row >> r.agents >> r.soc >> r.makespan)) {
      throw std::runtime_error("malformed oracle fixture row: " + line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_oracle_fixture(const std::filesystem::path& path, const std::vector<OracleRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write oracle fixture " + path.string());
  out << "# map\tscen\tn\tsoc\tmakespan\n";
  for (const auto& r : records) {
    out << r.map_id << '\t' << r.scen_id << '\t' << r.agents << '\t' << r.soc << '\t' << r.makespan << '\n';
  }
}

}  // namespace accbs

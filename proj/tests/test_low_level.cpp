#include "accbs/low_level.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace accbs;
using namespace testsupport;

namespace {

std::vector<std::string> random_rows(Rng& rng, int h, int w, double blocked) {
  std::vector<std::string> rows(h, std::string(w, '.'));
  for (auto& row : rows)
    for (auto& c : row)
      if (bernoulli(rng, blocked)) c = '@';
  rows[0][0] = '.';
  return rows;
}

std::vector<Constraint> random_constraints(const Graph& g, AgentId agent, int H, int count, Rng& rng) {
  std::vector<Constraint> cons;
  for (int k = 0; k < count; ++k) {
    const auto v = static_cast<VertexId>(uniform_index(rng, g.num_vertices()));
    if (bernoulli(rng, 0.6)) {
      cons.push_back(Constraint::vertex(agent, 1 + static_cast<int>(uniform_index(rng, H)), v));
    } else {
      auto nb = g.neighbors(v);
      const VertexId w = nb.empty() || bernoulli(rng, 0.2) ? v : nb[uniform_index(rng, nb.size())];
      cons.push_back(Constraint::edge(agent, static_cast<int>(uniform_index(rng, H)), v, w));
    }
  }
  return cons;
}

}  // namespace

TEST_CASE("ind_plan without constraints follows a shortest path then waits") {
  auto g = empty_grid(8, 8);
  auto inst = make(g, {{{1, 2}, {5, 6}}});
  const CostModel model = make_cost_model(inst);
  auto t = ind_plan(*g, model, g->vertex_at(1, 2), 0, 12, {});
  REQUIRE(t);
  CHECK(t->horizon() == 12);
  CHECK(trajectory_cost(*t, model) == 8);
  for (int l = 0; l < 8; ++l) CHECK(model.terminal(0, t->at(l + 1)) == model.terminal(0, t->at(l)) - 1);
  for (int l = 8; l <= 12; ++l) CHECK(t->at(l) == g->vertex_at(5, 6));
}

TEST_CASE("ind_plan on a corridor with a vertex constraint waits first") {
  auto g = grid({"...."});
  auto inst = make(g, {{{0, 0}, {0, 3}}});
  const CostModel model = make_cost_model(inst);
  std::vector<Constraint> cons{Constraint::vertex(0, 1, 1)};
  auto t = ind_plan(*g, model, 0, 0, 5, cons);
  REQUIRE(t);
  CHECK(t->vertices == std::vector<VertexId>{0, 0, 1, 2, 3, 3});
  CHECK(trajectory_cost(*t, model) == 4);

  // Reference: the best constraint-satisfying 5-step walk by enumeration.
  const auto apsp = all_pairs(*g);
  int best = kInf;
  for (const auto& w : enumerate_walks(*g, 0, 5))
    if (naive_satisfies(w, 0, cons)) best = std::min(best, naive_cost(w, 3, apsp));
  CHECK(best == 4);
}

TEST_CASE("ind_plan returns nothing when boxed in") {
  auto g = empty_grid(3, 3);
  auto inst = make(g, {{{1, 1}, {0, 0}}});
  const CostModel model = make_cost_model(inst);
  const VertexId c = g->vertex_at(1, 1);
  std::vector<Constraint> cons{Constraint::vertex(0, 1, c)};
  for (VertexId w : g->neighbors(c)) cons.push_back(Constraint::vertex(0, 1, w));
  CHECK_FALSE(ind_plan(*g, model, c, 0, 4, cons));
}

TEST_CASE("ind_plan ignores other agents' constraints and rejects bad times") {
  auto g = grid({"...."});
  auto inst = make(g, {{{0, 0}, {0, 3}}, {{0, 3}, {0, 0}}});
  const CostModel model = make_cost_model(inst);
  std::vector<Constraint> foreign{Constraint::vertex(1, 1, 1)};
  auto t = ind_plan(*g, model, 0, 0, 4, foreign);
  REQUIRE(t);
  CHECK(t->vertices == std::vector<VertexId>{0, 1, 2, 3, 3});
  std::vector<Constraint> late{Constraint::vertex(0, 5, 1)};
  CHECK_THROWS_AS(ind_plan(*g, model, 0, 0, 4, late), std::invalid_argument);
  std::vector<Constraint> late_edge{Constraint::edge(0, 4, 1, 2)};
  CHECK_THROWS_AS(ind_plan(*g, model, 0, 0, 4, late_edge), std::invalid_argument);
}

TEST_CASE("ind_plan is optimal against exhaustive walk enumeration") {
  Rng rng(21);
  int checked = 0, infeasible = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const bool corridor = trial % 3 == 0;
    const int h = corridor ? 1 : 2 + static_cast<int>(uniform_index(rng, 3));
    const int w = corridor ? 3 + static_cast<int>(uniform_index(rng, 4)) : 2 + static_cast<int>(uniform_index(rng, 3));
    auto g = grid(random_rows(rng, h, w, corridor ? 0.0 : 0.2));
    const auto apsp = all_pairs(*g);
    const VertexId start = static_cast<VertexId>(uniform_index(rng, g->num_vertices()));
    VertexId goal = static_cast<VertexId>(uniform_index(rng, g->num_vertices()));
    if (apsp[start][goal] >= kInf) goal = start;
    auto inst = make_instance(g, {{0, start, goal}});
    const CostModel model = make_cost_model(inst);
    const int H = 1 + static_cast<int>(uniform_index(rng, corridor ? 6 : 5));
    const auto cons = random_constraints(*g, 0, H, static_cast<int>(uniform_index(rng, 5)), rng);

    int best = kInf;
    for (const auto& walk : enumerate_walks(*g, start, H)) {
      if (naive_satisfies(walk, 0, cons)) best = std::min(best, naive_cost(walk, goal, apsp));
    }
    auto t = ind_plan(*g, model, start, 0, H, cons);
    if (best >= kInf) {
      CHECK_FALSE(t);
      ++infeasible;
      continue;
    }
    REQUIRE(t);
    ++checked;
    CHECK(t->horizon() == H);
    CHECK(t->at(0) == start);
    CHECK(satisfies(*t, cons));
    for (int l = 0; l < H; ++l) CHECK(adjacent_or_same(*g, t->at(l), t->at(l + 1)));
    CHECK(trajectory_cost(*t, model) == best);

    // Suffix property beyond T*.
    const int tstar = max_constrained_step(0, cons);
    for (int l = std::max(tstar, 0); l < H; ++l) {
      const Cost now = apsp[t->at(l)][goal], next = apsp[t->at(l + 1)][goal];
      CHECK(next == std::max(now - 1, 0));
      if (next == 0) CHECK(t->at(l + 1) == goal);
    }
  }
  CHECK(checked > 100);
  CHECK(infeasible > 0);
}

TEST_CASE("adding a constraint never lowers the optimal cost") {
  Rng rng(33);
  auto g = std::make_shared<const Graph>(build_graph(load_map(ACCBS_DATA_DIR "/random-32-32-10.map")));
  auto agents = random_agents(*g, 1, rng);
  auto inst = make_instance(g, agents);
  const CostModel model = make_cost_model(inst);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Constraint> cons;
    auto t = ind_plan(*g, model, agents[0].start, 0, 16, cons);
    REQUIRE(t);
    Cost previous = trajectory_cost(*t, model);
    for (int k = 0; k < 12; ++k) {
      // Block a vertex on the current plan, as CBS would.
      const int time = 1 + static_cast<int>(uniform_index(rng, 16));
      cons.push_back(Constraint::vertex(0, time, t->at(time)));
      auto next = ind_plan(*g, model, agents[0].start, 0, 16, cons);
      if (!next) break;
      const Cost c = trajectory_cost(*next, model);
      CHECK(c >= previous);
      previous = c;
      t = next;
    }
  }
}

TEST_CASE("the heuristic never exceeds the true constrained cost-to-go") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = grid(random_rows(rng, 3, 3, 0.15));
    const auto apsp = all_pairs(*g);
    const VertexId goal = 0;
    const int H = 4;
    const auto cons = random_constraints(*g, 0, H, 3, rng);
    for (VertexId v = 0; v < g->num_vertices(); ++v) {
      if (apsp[v][goal] >= kInf) continue;
      for (int t = 0; t <= H; ++t) {
        // Cheapest completion from (v, t) satisfying the constraints.
        int best = kInf;
        for (const auto& tail : enumerate_walks(*g, v, H - t)) {
          std::vector<VertexId> padded(t, v);
          padded.insert(padded.end(), tail.begin(), tail.end());
          bool ok = true;
          for (const auto& c : cons) {
            if (c.time < t) continue;
            if (c.kind == ConflictKind::kVertex && padded[c.time] == c.from) ok = false;
            if (c.kind == ConflictKind::kEdge && padded[c.time] == c.from && padded[c.time + 1] == c.to) ok = false;
          }
          if (!ok) continue;
          int cost = apsp[tail.back()][goal];
          if (cost >= kInf) continue;
          for (size_t l = 0; l + 1 < tail.size(); ++l) cost += tail[l] != goal;
          best = std::min(best, cost);
        }
        if (best < kInf) CHECK(apsp[v][goal] <= best);
      }
    }
  }
}

TEST_CASE("plan_all and replan_agents") {
  auto g = empty_grid(8, 8);
  auto inst = make(g, {{{0, 0}, {0, 5}}, {{7, 0}, {7, 5}}});
  const CostModel model = make_cost_model(inst);
  const State s = initial_state(inst);
  auto joint = plan_all(*g, model, s, 8, {});
  REQUIRE(joint);
  CHECK(trajectory_cost(joint->paths[0], model) == 5);
  CHECK(trajectory_cost(joint->paths[1], model) == 5);
  CHECK_FALSE(find_conflict(*joint, 8));

  std::vector<Constraint> cons{Constraint::vertex(0, 1, g->vertex_at(0, 1))};
  std::vector<AgentId> who{0};
  auto child = replan_agents(*g, model, s, 8, cons, *joint, who);
  REQUIRE(child);
  CHECK(child->paths[1] == joint->paths[1]);
  CHECK(satisfies(child->paths[0], cons));
  CHECK(trajectory_cost(child->paths[0], model) == 6);
}

TEST_CASE("plan_all output satisfies every constraint on randomized instances") {
  Rng rng(8);
  auto g = empty_grid(6, 6);
  for (int trial = 0; trial < 50; ++trial) {
    auto agents = random_agents(*g, 4, rng);
    auto inst = make_instance(g, agents);
    const CostModel model = make_cost_model(inst);
    std::vector<Constraint> cons;
    for (AgentId a = 0; a < 4; ++a) {
      auto more = random_constraints(*g, a, 8, 4, rng);
      cons.insert(cons.end(), more.begin(), more.end());
    }
    auto joint = plan_all(*g, model, initial_state(inst), 8, cons);
    if (!joint) continue;
    for (const auto& p : joint->paths) CHECK(naive_satisfies(p.vertices, p.agent, cons));
  }
}

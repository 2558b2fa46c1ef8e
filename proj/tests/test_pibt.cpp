#include "accbs/engine.hpp"
#include "accbs/pibt.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace accbs;
using namespace testsupport;

namespace {

// All conflict-free joint moves from `from`, by enumeration of each agent's options.
std::vector<std::vector<VertexId>> all_valid_moves(const Graph& g, const std::vector<VertexId>& from) {
  std::vector<std::vector<VertexId>> out{{}};
  for (VertexId v : from) {
    std::vector<std::vector<VertexId>> next;
    for (const auto& partial : out) {
      for (VertexId w = 0; w < g.num_vertices(); ++w) {
        if (!adjacent_or_same(g, v, w)) continue;
        auto ext = partial;
        ext.push_back(w);
        next.push_back(std::move(ext));
      }
    }
    out = std::move(next);
  }
  std::erase_if(out, [&](const auto& to) { return !naive_transition_ok(from, to); });
  return out;
}

Cost one_step_cost(const CostModel& model, const std::vector<VertexId>& from, const std::vector<VertexId>& to) {
  Cost c = 0;
  for (size_t a = 0; a < from.size(); ++a) c += model.stage(a, from[a]) + model.terminal(a, to[a]);
  return c;
}

}  // namespace

TEST_CASE("pibt_step moves a single agent along its shortest path") {
  auto g = empty_grid(5, 5);
  auto inst = make(g, {{{2, 2}, {0, 4}}});
  const CostModel model = make_cost_model(inst);
  auto cmd = pibt_step(*g, model, initial_state(inst), PriorityTable::uniform(1));
  // Candidates tie on gamma; the lower vertex id wins.
  CHECK(cmd.moves[0] == Edge{g->vertex_at(2, 2), g->vertex_at(1, 2)});
}

TEST_CASE("pibt_step head-on in a corridor with a side cell") {
  // Corridor a-b-c along the bottom row, siding s above b.
  auto g = grid({"@.@", "..."});
  const VertexId s_cell = g->vertex_at(0, 1), a = g->vertex_at(1, 0), b = g->vertex_at(1, 1);
  auto inst = make(g, {{{1, 0}, {1, 2}}, {{1, 1}, {1, 0}}});
  const CostModel model = make_cost_model(inst);
  PriorityTable pri{{5, 0}};  // agent 0 has waited longer
  const State s = initial_state(inst);
  REQUIRE(s.positions == std::vector<VertexId>{a, b});
  auto cmd = pibt_step(*g, model, s, pri);
  const auto targets = cmd.targets();
  CHECK(targets[0] == b);
  CHECK(targets[1] == s_cell);
  const auto valid = all_valid_moves(*g, s.positions);
  CHECK(std::find(valid.begin(), valid.end(), targets) != valid.end());

  // Same corridor, siding not adjacent to the pushed agent: it backs off along the corridor.
  auto g2 = grid({"....", "@.@@"});
  auto inst2 = make(g2, {{{0, 1}, {0, 3}}, {{0, 2}, {0, 0}}});
  const State s2 = initial_state(inst2);
  auto t2 = pibt_step(*g2, make_cost_model(inst2), s2, pri).targets();
  CHECK(t2 == std::vector<VertexId>{g2->vertex_at(0, 2), g2->vertex_at(0, 3)});
  const auto valid2 = all_valid_moves(*g2, s2.positions);
  CHECK(std::find(valid2.begin(), valid2.end(), t2) != valid2.end());
}

TEST_CASE("pibt_step keeps agents at their goals") {
  auto g = empty_grid(4, 4);
  auto inst = make(g, {{{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, {{3, 2}, {3, 2}}});
  auto cmd = pibt_step(*g, make_cost_model(inst), initial_state(inst), PriorityTable::uniform(3));
  CHECK(cmd.all_wait());
}

TEST_CASE("pibt_step output is always collision-free and deterministic") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    auto g = empty_grid(4, 4);
    const int n = 2 + static_cast<int>(uniform_index(rng, 13));
    auto inst = make_instance(g, random_agents(*g, n, rng));
    const CostModel model = make_cost_model(inst);
    PriorityTable pri = PriorityTable::uniform(n);
    for (auto& e : pri.elapsed) e = static_cast<int>(uniform_index(rng, 5));
    const State s = initial_state(inst);
    auto cmd = pibt_step(*g, model, s, pri);
    const auto to = cmd.targets();
    CHECK(naive_transition_ok(s.positions, to));
    for (AgentId a = 0; a < n; ++a) {
      CHECK(cmd.moves[a].from == s.positions[a]);
      CHECK(adjacent_or_same(*g, s.positions[a], to[a]));
    }
    CHECK(pibt_step(*g, model, s, pri) == cmd);
  }
}

TEST_CASE("priority table ordering and bookkeeping") {
  PriorityTable t{{0, 3, 3, 1}};
  CHECK(t.order() == std::vector<AgentId>{1, 2, 3, 0});
  State s{{5, 6, 7, 8}, 1};
  t.update(s, {5, 0, 0, 8});
  CHECK(t.elapsed == std::vector<int>{0, 4, 4, 0});
  State grown{{5, 6, 7, 8, 9}, 2};
  t.update(grown, {0, 0, 0, 0, 0});
  CHECK(t.elapsed.size() == 5);
  CHECK(t.elapsed[4] == 1);
  CHECK_THROWS_AS(pibt_step(*empty_grid(2, 2), CostModel{}, State{{0}, 0}, PriorityTable::uniform(2)),
                  std::invalid_argument);
}

TEST_CASE("one-step ACCBS is never worse than PIBT") {
  Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = empty_grid(4, 4);
    const int n = 2 + static_cast<int>(uniform_index(rng, 5));
    auto inst = make_instance(g, random_agents(*g, n, rng));
    const CostModel model = make_cost_model(inst);
    const State s = initial_state(inst);
    SearchConfig c;
    c.max_horizon = 1;
    c.budget = Budget::expansions(1'000'000);
    auto r = accbs_step(inst, s, c);
    auto p = pibt_step(*g, model, s, PriorityTable::uniform(n));
    const Cost accbs_cost = one_step_cost(model, s.positions, r.movement.targets());
    CHECK(accbs_cost <= one_step_cost(model, s.positions, p.targets()));
    // And it is the enumerated one-step optimum.
    Cost best = kUnreachable;
    for (const auto& to : all_valid_moves(*g, s.positions)) best = std::min(best, one_step_cost(model, s.positions, to));
    CHECK(accbs_cost == best);
  }
}

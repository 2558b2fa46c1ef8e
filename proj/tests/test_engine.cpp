#include <set>

#include "accbs/engine.hpp"
#include "accbs/low_level.hpp"
#include "accbs/oracles.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace accbs;
using namespace testsupport;

namespace {

struct Recorder : SearchObserver {
  bool nodes = false;
  std::vector<NodeRecord> generated;
  std::vector<std::pair<Cost, int>> dequeued;  // (cost, h_r)
  std::vector<std::vector<Constraint>> dequeued_constraints;
  std::vector<std::pair<Cost, int>> incumbents;

  bool wants_nodes() const override { return nodes; }
  void on_node(const NodeRecord& r) override { generated.push_back(r); }
  void on_dequeue(const NodeRecord* r, Cost cost, int h) override {
    dequeued.emplace_back(cost, h);
    if (r) {
      auto cons = r->constraints;
      std::sort(cons.begin(), cons.end());
      dequeued_constraints.push_back(cons);
    }
  }
  void on_incumbent(Cost cost, int h) override { incumbents.emplace_back(cost, h); }
};

SearchConfig unbounded(int hmax) {
  SearchConfig c;
  c.max_horizon = hmax;
  c.budget = Budget::expansions(1'000'000);
  return c;
}

// Corridor a-b-c with a siding below b.
std::shared_ptr<const Graph> siding() { return grid({"...", "@.@"}); }

}  // namespace

TEST_CASE("fh_cbs_step with disjoint shortest paths expands only the root") {
  auto g = empty_grid(8, 8);
  auto inst = make(g, {{{0, 0}, {0, 4}}, {{7, 0}, {7, 4}}});
  for (int H : {1, 3, 8}) {
    auto r = fh_cbs_step(inst, initial_state(inst), H, Budget::expansions(100));
    CHECK(r.status == StepStatus::kOptimalAtHorizon);
    CHECK(r.expansions == 1);
    CHECK(r.generated == 1);
    CHECK(r.movement.moves[0] == Edge{g->vertex_at(0, 0), g->vertex_at(0, 1)});
    CHECK(r.movement.moves[1] == Edge{g->vertex_at(7, 0), g->vertex_at(7, 1)});
  }
}

TEST_CASE("fh_cbs_step sends one agent into the siding") {
  auto g = siding();
  auto inst = make(g, {{{0, 0}, {0, 2}}, {{0, 2}, {0, 0}}});
  auto r = fh_cbs_step(inst, initial_state(inst), 4, Budget::expansions(100000));
  auto brute = brute_force_joint(inst, 4);
  REQUIRE(brute);
  REQUIRE(r.incumbent_cost);
  CHECK(*r.incumbent_cost == brute->second);
  REQUIRE(r.plan);
  CHECK_FALSE(find_conflict(*r.plan, 4));
  const VertexId side = g->vertex_at(1, 1);
  bool used = false;
  for (const auto& p : r.plan->paths)
    for (VertexId v : p.vertices) used |= v == side;
  CHECK(used);
}

TEST_CASE("fh_cbs_step matches the brute-force optimum on small instances") {
  Rng rng(5);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto g = empty_grid(3, 3);
    const int n = 2 + static_cast<int>(uniform_index(rng, 2));
    auto inst = make_instance(g, random_agents(*g, n, rng));
    const int H = 1 + static_cast<int>(uniform_index(rng, 5));
    auto brute = brute_force_joint(inst, H);
    if (!brute) continue;
    auto r = fh_cbs_step(inst, initial_state(inst), H, Budget::expansions(1'000'000));
    REQUIRE(r.incumbent_cost);
    CHECK(*r.incumbent_cost == brute->second);
    ++compared;
  }
  CHECK(compared > 40);
}

TEST_CASE("accbs_step for a single agent climbs the horizon on the root") {
  auto g = empty_grid(8, 8);
  auto inst = make(g, {{{0, 0}, {7, 7}}});
  Recorder rec;
  auto r = accbs_step(inst, initial_state(inst), unbounded(20), nullptr, &rec);
  CHECK(r.status == StepStatus::kOptimalAtHorizon);
  CHECK(r.reached_horizon == 20);
  CHECK(r.generated == 1);
  CHECK(r.expansions == 1);
  CHECK(*r.incumbent_cost == 14);
  const auto field = distance_field(*g, g->vertex_at(7, 7));
  CHECK(r.movement.moves[0].from == g->vertex_at(0, 0));
  CHECK(field[r.movement.moves[0].to] == 13);
  REQUIRE(rec.incumbents.size() == 1);
  CHECK(rec.incumbents[0].second == 20);
}

TEST_CASE("accbs_step with a zero budget falls back to PIBT") {
  auto g = empty_grid(6, 6);
  Rng rng(1);
  auto inst = make_instance(g, random_agents(*g, 12, rng));
  SearchConfig c = unbounded(8);
  c.budget = Budget::expansions(0);
  auto r = accbs_step(inst, initial_state(inst), c);
  CHECK(r.status == StepStatus::kFallbackPibt);
  CHECK(r.expansions == 0);
  CHECK_FALSE(r.incumbent_cost);
  const State s = initial_state(inst);
  CHECK(naive_transition_ok(s.positions, r.movement.targets()));
  for (AgentId a = 0; a < inst.num_agents(); ++a) CHECK(r.movement.moves[a].from == s.positions[a]);
}

TEST_CASE("accbs_step final cost equals classic CBS on small empty-grid instances") {
  auto g = empty_grid(8, 8);
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = make_instance(g, random_agents(*g, 4, rng));
    auto r = accbs_step(inst, initial_state(inst), unbounded(64));
    const auto oracle = classic_cbs(inst, 200000);
    REQUIRE(r.incumbent_cost);
    CHECK(r.status == StepStatus::kOptimalAtHorizon);
    CHECK(*r.incumbent_cost == oracle.soc);
  }
}

TEST_CASE("split_conflict and generate_children") {
  Conflict vc{ConflictKind::kVertex, 0, 1, 2, 5, 5};
  auto [a, b] = split_conflict(vc);
  CHECK(a == Constraint::vertex(0, 2, 5));
  CHECK(b == Constraint::vertex(1, 2, 5));

  Conflict ec{ConflictKind::kEdge, 0, 1, 1, 3, 4};
  auto [c, d] = split_conflict(ec);
  CHECK(c == Constraint::edge(0, 0, 3, 4));
  CHECK(d == Constraint::edge(1, 0, 4, 3));

  // 1x3 corridor: agent 0 sits at the dead end, agent 1 heads for the middle.
  // Agent 0 may not stay at t=1; splitting a meeting in the middle at t=1
  // then boxes agent 0 in while agent 1 still has a plan.
  auto g = grid({"..."});
  auto inst2 = make_instance(g, {{0, 0, 0}, {1, 2, 1}});
  const CostModel model = make_cost_model(inst2);
  const State s = initial_state(inst2);
  Conflict meet{ConflictKind::kVertex, 0, 1, 1, 1, 1};
  std::vector<Constraint> boxed{Constraint::vertex(0, 1, 0)};
  ConstraintTree tree2(*g, model, s, 3);
  REQUIRE(tree2.make_root());
  auto pre = tree2.plan_child(0, boxed[0]);
  REQUIRE(pre);
  const int parent = tree2.insert_child(0, *pre, 1);
  auto [ci, cj] = tree2.generate_children(parent, meet, 1);
  CHECK_FALSE(ci);
  REQUIRE(cj);
  CHECK(tree2.constraints(*cj).size() == 2);
  // Enumeration agrees: agent 0 has no 3-step walk avoiding vertices 0 and 1 at t=1.
  bool any = false;
  for (const auto& w : enumerate_walks(*g, 0, 3)) any |= w[1] != 0 && w[1] != 1;
  CHECK_FALSE(any);
  // The sibling's untouched agent keeps its parent trajectory.
  CHECK(tree2.joint(*cj).paths[0] == tree2.joint(parent).paths[0]);
}

TEST_CASE("extract_first_step") {
  auto waits = joint_of({{3, 3, 3}, {5, 5, 5}});
  auto cmd = extract_first_step(waits);
  CHECK(cmd.all_wait());
  auto one = joint_of({{0, 1}, {4, 3}});
  auto c1 = extract_first_step(one);
  CHECK(c1.moves[0] == Edge{0, 1});
  CHECK(c1.moves[1] == Edge{4, 3});
}

TEST_CASE("node costs are invariant across prefix lengths and dequeues are monotone") {
  auto g = std::make_shared<const Graph>(build_graph(load_map(ACCBS_DATA_DIR "/random-32-32-10.map")));
  Rng rng(4);
  auto inst = make_instance(g, random_agents(*g, 20, rng));
  SearchConfig c;
  c.max_horizon = 16;
  c.budget = Budget::expansions(300);
  c.check_invariants = true;
  Recorder rec;
  rec.nodes = true;
  auto r = accbs_step(inst, initial_state(inst), c, nullptr, &rec);
  CHECK(rec.generated.size() > 1);
  const CostModel model = make_cost_model(inst);
  for (const auto& node : rec.generated) {
    Cost sum = 0;
    for (const auto& p : node.joint.paths) {
      sum += trajectory_cost(p, model);
      std::vector<Constraint> mine;
      for (const auto& k : node.constraints)
        if (k.agent == p.agent) mine.push_back(k);
      CHECK(naive_satisfies(p.vertices, p.agent, mine));
    }
    CHECK(sum == node.cost);
    int from = 1;
    for (const auto& k : node.constraints) from = std::max(from, k.last_step());
    for (int h = from; h <= c.max_horizon; ++h) CHECK(prefix_cost(node.joint, model, h) == node.cost);
  }
  for (size_t i = 1; i < rec.dequeued.size(); ++i) CHECK(rec.dequeued[i - 1].first <= rec.dequeued[i].first);
  for (size_t i = 1; i < rec.incumbents.size(); ++i) {
    CHECK(rec.incumbents[i - 1].first <= rec.incumbents[i].first);
    CHECK(rec.incumbents[i - 1].second < rec.incumbents[i].second);
  }
  (void)r;
}

TEST_CASE("the adaptive tree contains the direct run's expansions below the optimum") {
  auto g = empty_grid(5, 5);
  Rng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    auto inst = make_instance(g, random_agents(*g, 5, rng));
    const int H = 10;
    Recorder adaptive, direct;
    adaptive.nodes = direct.nodes = true;
    auto ra = accbs_step(inst, initial_state(inst), unbounded(H), nullptr, &adaptive);
    auto rd = fh_cbs_step(inst, initial_state(inst), H, Budget::expansions(1'000'000), nullptr, &direct);
    REQUIRE(ra.incumbent_cost);
    REQUIRE(rd.incumbent_cost);
    CHECK(*ra.incumbent_cost == *rd.incumbent_cost);
    const Cost optimum = *rd.incumbent_cost;
    std::set<std::vector<Constraint>> tree;
    for (const auto& n : adaptive.generated) {
      auto cons = n.constraints;
      std::sort(cons.begin(), cons.end());
      tree.insert(cons);
    }
    for (size_t i = 0; i < direct.dequeued.size(); ++i) {
      if (direct.dequeued[i].first >= optimum) continue;
      CHECK(tree.count(direct.dequeued_constraints[i]) == 1);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("prioritized conflicts keep optimality") {
  auto g = empty_grid(6, 6);
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = make_instance(g, random_agents(*g, 6, rng));
    SearchConfig plain = unbounded(24), pc = unbounded(24);
    pc.use_prioritized_conflicts = true;
    auto a = accbs_step(inst, initial_state(inst), plain);
    auto b = accbs_step(inst, initial_state(inst), pc);
    REQUIRE(a.incumbent_cost);
    REQUIRE(b.incumbent_cost);
    CHECK(*a.incumbent_cost == *b.incumbent_cost);
  }
}

TEST_CASE("search errors and validation") {
  auto g = empty_grid(3, 3);
  auto inst = make_instance(g, {{0, 0, 8}, {1, 4, 2}});
  State clash{{4, 4}, 0};
  CHECK_THROWS_AS(fh_cbs_step(inst, clash, 3, Budget::expansions(100)), SearchError);
  CHECK_THROWS_AS(accbs_step(inst, clash, unbounded(3)), SearchError);
  try {
    accbs_step(inst, clash, unbounded(3));
  } catch (const SearchError& e) {
    CHECK(std::string(e.what()) == "infeasible within H_max");
  }
  CHECK_THROWS_AS(fh_cbs_step(inst, initial_state(inst), 0, Budget::expansions(1)), std::invalid_argument);
  SearchConfig bad;
  bad.max_horizon = 0;
  CHECK_THROWS_AS(accbs_step(inst, initial_state(inst), bad), std::invalid_argument);
  CHECK(to_string(StepStatus::kBudgetExhausted) == "budget-exhausted-with-incumbent");
}

TEST_CASE("anytime result is conflict-free up to the incumbent horizon") {
  auto g = empty_grid(6, 6);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = make_instance(g, random_agents(*g, 14, rng));
    SearchConfig c = unbounded(12);
    c.budget = Budget::expansions(1 + static_cast<int>(uniform_index(rng, 60)));
    auto r = accbs_step(inst, initial_state(inst), c);
    if (r.status == StepStatus::kFallbackPibt) continue;
    REQUIRE(r.plan);
    CHECK(r.reached_horizon >= 1);
    CHECK_FALSE(find_conflict(*r.plan, r.reached_horizon));
    CHECK(naive_transition_ok(initial_state(inst).positions, r.movement.targets()));
  }
}

TEST_CASE("wall-clock budgets terminate") {
  auto g = std::make_shared<const Graph>(build_graph(load_map(ACCBS_DATA_DIR "/random-32-32-10.map")));
  Rng rng(2);
  auto inst = make_instance(g, random_agents(*g, 100, rng));
  SearchConfig c;
  c.max_horizon = 16;
  c.budget = Budget::wall_clock_ms(20);
  auto r = accbs_step(inst, initial_state(inst), c);
  CHECK(r.elapsed_ms < 2000);
  CHECK(naive_transition_ok(initial_state(inst).positions, r.movement.targets()));
}

#include "accbs/engine.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <queue>
#include <tuple>

#include "accbs/low_level.hpp"

namespace accbs {

void SearchConfig::validate() const {
  if (max_horizon < 1) throw std::invalid_argument("SearchConfig: H_max must be >= 1");
  if (budget.amount < 0) throw std::invalid_argument("SearchConfig: budget must be non-negative");
}

std::string to_string(StepStatus status) {
  switch (status) {
    case StepStatus::kOptimalAtHorizon:
      return "optimal-at-hmax";
    case StepStatus::kBudgetExhausted:
      return "budget-exhausted-with-incumbent";
    case StepStatus::kFallbackPibt:
      return "fallback-pibt";
  }
  return "unknown";
}

ConstraintTree::ConstraintTree(const Graph& graph, const CostModel& model, const State& state, int horizon)
    : graph_(graph), model_(model), state_(state), horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("ConstraintTree: horizon must be >= 1");
}

std::optional<int> ConstraintTree::make_root() {
  if (!nodes_.empty()) throw std::logic_error("ConstraintTree: root already exists");
  Node root;
  root.id = 0;
  root.created_at_horizon = 0;
  for (AgentId a = 0; a < state_.num_agents(); ++a) {
    auto traj = ind_plan(graph_, model_, state_.positions[a], a, horizon_, {});
    if (!traj) return std::nullopt;
    path_costs_.push_back(trajectory_cost(*traj, model_));
    root.cost += path_costs_.back();
    root.path_ids.push_back(static_cast<int>(paths_.size()));
    paths_.push_back(std::move(traj->vertices));
  }
  nodes_.push_back(std::move(root));
  return 0;
}

std::vector<Constraint> ConstraintTree::constraints_for(int id, AgentId agent) const {
  std::vector<Constraint> out;
  for (int n = id; n != -1; n = nodes_[n].parent) {
    const auto& c = nodes_[n].constraint;
    if (c && c->agent == agent) out.push_back(*c);
  }
  return out;
}

std::vector<Constraint> ConstraintTree::constraints(int id) const {
  std::vector<Constraint> out;
  for (int n = id; n != -1; n = nodes_[n].parent) {
    if (nodes_[n].constraint) out.push_back(*nodes_[n].constraint);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<ConstraintTree::PendingChild> ConstraintTree::plan_child(int parent, const Constraint& constraint) {
  std::vector<Constraint> cons = constraints_for(parent, constraint.agent);
  cons.push_back(constraint);
  const AgentId a = constraint.agent;
  auto traj = ind_plan(graph_, model_, state_.positions[a], a, horizon_, cons);
  if (!traj) return std::nullopt;
  PendingChild child{constraint, static_cast<int>(paths_.size()), trajectory_cost(*traj, model_)};
  path_costs_.push_back(child.cost);
  paths_.push_back(std::move(traj->vertices));
  return child;
}

int ConstraintTree::insert_child(int parent, const PendingChild& child, int running_horizon) {
  Node node;
  node.id = static_cast<int>(nodes_.size());
  node.parent = parent;
  node.constraint = child.constraint;
  node.path_ids = nodes_[parent].path_ids;
  const AgentId a = child.constraint.agent;
  node.cost = nodes_[parent].cost - path_costs_[node.path_ids[a]] + child.cost;
  node.path_ids[a] = child.path_id;
  node.created_at_horizon = running_horizon;
  nodes_.push_back(std::move(node));
  auto spans = path_spans(nodes_.back().id);
  nodes_.back().conflicts = count_conflicts(PathSpans(spans), std::min(running_horizon, horizon_));
  return nodes_.back().id;
}

std::pair<Constraint, Constraint> split_conflict(const Conflict& c) {
  if (c.kind == ConflictKind::kVertex) {
    return {Constraint::vertex(c.first, c.time, c.u), Constraint::vertex(c.second, c.time, c.u)};
  }
  return {Constraint::edge(c.first, c.time - 1, c.u, c.w), Constraint::edge(c.second, c.time - 1, c.w, c.u)};
}

std::pair<std::optional<int>, std::optional<int>> ConstraintTree::generate_children(int parent,
                                                                                     const Conflict& conflict,
                                                                                     int running_horizon) {
  auto [ci, cj] = split_conflict(conflict);
  std::pair<std::optional<int>, std::optional<int>> out;
  if (auto child = plan_child(parent, ci)) out.first = insert_child(parent, *child, running_horizon);
  if (auto child = plan_child(parent, cj)) out.second = insert_child(parent, *child, running_horizon);
  return out;
}

std::vector<std::span<const VertexId>> ConstraintTree::path_spans(int id) const {
  std::vector<std::span<const VertexId>> spans;
  spans.reserve(nodes_[id].path_ids.size());
  for (int pid : nodes_[id].path_ids) spans.emplace_back(paths_[pid]);
  return spans;
}

JointTrajectory ConstraintTree::joint(int id) const {
  JointTrajectory joint;
  const auto& ids = nodes_[id].path_ids;
  joint.paths.reserve(ids.size());
  for (size_t a = 0; a < ids.size(); ++a) joint.paths.push_back({static_cast<AgentId>(a), paths_[ids[a]]});
  return joint;
}

NodeRecord ConstraintTree::record(int id) const {
  NodeRecord r;
  r.id = id;
  if (nodes_[id].parent != -1) r.parent = nodes_[id].parent;
  r.constraints = constraints(id);
  r.joint = joint(id);
  r.cost = nodes_[id].cost;
  r.created_at_horizon = nodes_[id].created_at_horizon;
  return r;
}

MovementCommand extract_first_step(const JointTrajectory& joint) {
  if (joint.paths.empty() || joint.horizon() < 1) {
    throw std::invalid_argument("extract_first_step: joint trajectory has no first step");
  }
  MovementCommand cmd;
  cmd.moves.reserve(joint.paths.size());
  for (const auto& p : joint.paths) cmd.moves.push_back({p.vertices[0], p.vertices[1]});
  return cmd;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

enum class Cardinality { kCardinal = 0, kSemiCardinal = 1, kNonCardinal = 2 };

struct SearchSetup {
  int max_horizon;
  int initial_horizon;
  Budget budget;
  bool prioritized;
  bool check_invariants;
  const char* exhausted_message;
};

// Largest step index any constraint of the node touches; the cost-invariance
// argument applies to every prefix length at or beyond it.
int node_constrained_step(const std::vector<Constraint>& cons) {
  int t = 0;
  for (const auto& c : cons) t = std::max(t, c.last_step());
  return t;
}

void check_cost_invariance(const ConstraintTree& tree, int id, const CostModel& model) {
  const JointTrajectory joint = tree.joint(id);
  const Cost cost = tree.node(id).cost;
  Cost sum = 0;
  for (const auto& p : joint.paths) sum += trajectory_cost(p, model);
  if (sum != cost) throw std::logic_error("node cost does not equal the sum of trajectory costs");
  const int from = std::max(1, node_constrained_step(tree.constraints(id)));
  for (int h = from; h <= tree.horizon(); ++h) {
    if (prefix_cost(joint, model, h) != cost) {
      throw std::logic_error("cost invariance violated at h=" + std::to_string(h));
    }
  }
}

StepResult run_search(const Instance& instance, const State& state, const SearchSetup& setup,
                      const PriorityTable* priorities, SearchObserver* observer) {
  const auto start = Clock::now();
  const Graph& graph = *instance.graph;
  if (state.num_agents() != instance.num_agents()) {
    throw std::invalid_argument("search: state and instance disagree on the agent count");
  }
  const CostModel model = make_cost_model(instance);
  ConstraintTree tree(graph, model, state, setup.max_horizon);

  StepResult result;
  std::int64_t expansions = 0;
  auto expired = [&] {
    if (setup.budget.kind == Budget::Kind::kExpansions) return expansions >= setup.budget.amount;
    return ms_since(start) >= static_cast<double>(setup.budget.amount);
  };

  auto finish_fallback = [&] {
    const PriorityTable table = priorities ? *priorities : PriorityTable::uniform(state.num_agents());
    result.movement = pibt_step(graph, model, state, table);
    result.status = StepStatus::kFallbackPibt;
    result.reached_horizon = 0;
    result.expansions = expansions;
    result.generated = tree.size();
    result.elapsed_ms = ms_since(start);
    return result;
  };

  const bool want_nodes = observer && observer->wants_nodes();
  auto announce = [&](int id) {
    if (setup.check_invariants) check_cost_invariance(tree, id, model);
    if (want_nodes) observer->on_node(tree.record(id));
  };

  if (!tree.make_root()) throw SearchError(setup.exhausted_message);
  announce(0);

  int running = setup.initial_horizon;
  // OPEN order: (cost, conflict count, creation index).
  using Key = std::tuple<Cost, int, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> open;
  {
    auto spans = tree.path_spans(0);
    const int root_conflicts = count_conflicts(PathSpans(spans), running);
    open.emplace(tree.node(0).cost, root_conflicts, 0);
  }

  std::optional<int> incumbent;
  int incumbent_horizon = 0;
  bool complete = false;

  // With prioritized conflicts, the lookahead children of the chosen conflict
  // are kept and inserted instead of being replanned.
  struct Selection {
    Conflict conflict;
    std::optional<std::pair<std::optional<ConstraintTree::PendingChild>,
                            std::optional<ConstraintTree::PendingChild>>>
        children;
  };
  auto select_conflict = [&](int id, int h) -> std::optional<Selection> {
    auto spans = tree.path_spans(id);
    if (!setup.prioritized) {
      auto c = find_conflict(PathSpans(spans), h);
      if (!c) return std::nullopt;
      return Selection{*c, std::nullopt};
    }
    auto all = list_conflicts(PathSpans(spans), h);
    if (all.empty()) return std::nullopt;
    std::optional<Selection> best;
    Cardinality best_class = Cardinality::kNonCardinal;
    for (const Conflict& c : all) {
      auto [ci, cj] = split_conflict(c);
      auto child_i = tree.plan_child(id, ci);
      auto child_j = tree.plan_child(id, cj);
      auto raises = [&](const std::optional<ConstraintTree::PendingChild>& child, AgentId agent) {
        return !child || child->cost > tree.agent_cost(id, agent);
      };
      const int increases = int(raises(child_i, ci.agent)) + int(raises(child_j, cj.agent));
      const Cardinality cls = increases == 2   ? Cardinality::kCardinal
                              : increases == 1 ? Cardinality::kSemiCardinal
                                               : Cardinality::kNonCardinal;
      if (!best || cls < best_class) {
        best = Selection{c, std::make_pair(child_i, child_j)};
        best_class = cls;
        if (cls == Cardinality::kCardinal) break;
      }
    }
    return best;
  };

  while (!open.empty()) {
    if (expired()) break;
    const auto [cost, conflicts_key, id] = open.top();
    open.pop();
    ++expansions;
    if (observer) {
      if (want_nodes) {
        const NodeRecord rec = tree.record(id);
        observer->on_dequeue(&rec, cost, running);
      } else {
        observer->on_dequeue(nullptr, cost, running);
      }
    }

    std::optional<Selection> conflict = select_conflict(id, running);
    if (!conflict) {
      incumbent = id;
      while (!conflict && running < setup.max_horizon) {
        ++running;
        conflict = select_conflict(id, running);
      }
      incumbent_horizon = conflict ? running - 1 : running;
      if (observer) observer->on_incumbent(cost, incumbent_horizon);
      if (!conflict) {
        complete = true;
        break;
      }
    }

    std::pair<std::optional<int>, std::optional<int>> children;
    if (conflict->children) {
      const auto& [pi, pj] = *conflict->children;
      if (pi) children.first = tree.insert_child(id, *pi, running);
      if (pj) children.second = tree.insert_child(id, *pj, running);
    } else {
      children = tree.generate_children(id, conflict->conflict, running);
    }
    for (auto child : {children.first, children.second}) {
      if (!child) continue;
      announce(*child);
      open.emplace(tree.node(*child).cost, tree.node(*child).conflicts, *child);
    }
  }

  if (!incumbent) {
    if (open.empty()) throw SearchError(setup.exhausted_message);
    return finish_fallback();
  }
  result.plan = tree.joint(*incumbent);
  result.movement = extract_first_step(*result.plan);
  result.status = complete ? StepStatus::kOptimalAtHorizon : StepStatus::kBudgetExhausted;
  result.reached_horizon = incumbent_horizon;
  result.incumbent_cost = tree.node(*incumbent).cost;
  result.expansions = expansions;
  result.generated = tree.size();
  result.elapsed_ms = ms_since(start);
  return result;
}

}  // namespace

StepResult fh_cbs_step(const Instance& instance, const State& state, int horizon, const Budget& budget,
                       const PriorityTable* priorities, SearchObserver* observer, bool use_prioritized_conflicts) {
  if (horizon < 1) throw std::invalid_argument("fh_cbs_step: horizon must be >= 1");
  if (budget.amount < 0) throw std::invalid_argument("fh_cbs_step: budget must be non-negative");
  SearchSetup setup{horizon, horizon, budget, use_prioritized_conflicts, false, "no H-step solution"};
  return run_search(instance, state, setup, priorities, observer);
}

StepResult accbs_step(const Instance& instance, const State& state, const SearchConfig& config,
                      const PriorityTable* priorities, SearchObserver* observer) {
  config.validate();
  SearchSetup setup{config.max_horizon, 1, config.budget, config.use_prioritized_conflicts,
                    config.check_invariants, "infeasible within H_max"};
  return run_search(instance, state, setup, priorities, observer);
}

}  // namespace accbs

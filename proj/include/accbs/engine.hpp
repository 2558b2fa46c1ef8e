#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "accbs/instance.hpp"
#include "accbs/model.hpp"
#include "accbs/pibt.hpp"

namespace accbs {

/// Search budget: either a node-expansion quota (deterministic) or a
/// wall-clock deadline in milliseconds.
struct Budget {
  enum class Kind { kExpansions, kWallClockMs };
  Kind kind = Kind::kExpansions;
  std::int64_t amount = 0;  // expansions, or milliseconds

  static Budget expansions(std::int64_t n) { return {Kind::kExpansions, n}; }
  static Budget wall_clock_ms(std::int64_t ms) { return {Kind::kWallClockMs, ms}; }
  static Budget unlimited() { return {Kind::kExpansions, INT64_MAX}; }
  bool deterministic() const { return kind == Kind::kExpansions; }
};

struct SearchConfig {
  int max_horizon = 1;  // H_max
  Budget budget = Budget::unlimited();
  bool use_prioritized_conflicts = false;
  // Verify cost invariance on every generated node (throws on violation).
  bool check_invariants = false;

  void validate() const;
};

enum class StepStatus { kOptimalAtHorizon, kBudgetExhausted, kFallbackPibt };
std::string to_string(StepStatus status);

struct StepResult {
  MovementCommand movement;
  int reached_horizon = 0;  // prefix length the returned plan is conflict-free on; 0 for fallback
  std::int64_t expansions = 0;
  std::int64_t generated = 0;
  std::optional<Cost> incumbent_cost;
  StepStatus status = StepStatus::kFallbackPibt;
  double elapsed_ms = 0.0;
  std::optional<JointTrajectory> plan;  // the incumbent joint trajectory, if any
};

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fully materialized constraint-tree node, handed to observers.
struct NodeRecord {
  int id = 0;
  std::optional<int> parent;
  std::vector<Constraint> constraints;
  JointTrajectory joint;
  Cost cost = 0;
  int created_at_horizon = 0;  // running horizon when the node was generated
};

// Hooks for tests and diagnostics. Nodes are only materialized when
// wants_nodes() returns true.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual bool wants_nodes() const { return false; }
  virtual void on_node(const NodeRecord&) {}
  virtual void on_dequeue(const NodeRecord* /*node, null unless wants_nodes*/, Cost /*cost*/, int /*h_r*/) {}
  virtual void on_incumbent(Cost /*cost*/, int /*conflict_free_horizon*/) {}
};

/// Constraint tree over fixed-length trajectories. Nodes store only their own
/// constraint and per-agent path handles; constraint sets are recovered by
/// walking to the root and child generation replans only the constrained agent.
class ConstraintTree {
 public:
  struct Node {
    int id = 0;
    int parent = -1;
    std::optional<Constraint> constraint;  // empty for the root
    Cost cost = 0;
    int conflicts = 0;  // active-prefix conflict count at creation (tie-break)
    int created_at_horizon = 0;
    std::vector<int> path_ids;
  };

  // A planned but not yet inserted child.
  struct PendingChild {
    Constraint constraint;
    int path_id = -1;
    Cost cost = 0;
  };

  ConstraintTree(const Graph& graph, const CostModel& model, const State& state, int horizon);

  int horizon() const { return horizon_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  Cost agent_cost(int id, AgentId agent) const { return path_costs_[nodes_[id].path_ids[agent]]; }

  // std::nullopt if some agent has no trajectory at all.
  std::optional<int> make_root();

  std::optional<PendingChild> plan_child(int parent, const Constraint& constraint);
  int insert_child(int parent, const PendingChild& child, int running_horizon);

  /// Splits `conflict` into one child per conflicting agent; children with no
  /// satisfying trajectory are absent.
  std::pair<std::optional<int>, std::optional<int>> generate_children(int parent, const Conflict& conflict,
                                                                       int running_horizon);

  std::vector<Constraint> constraints(int id) const;
  JointTrajectory joint(int id) const;
  std::vector<std::span<const VertexId>> path_spans(int id) const;
  NodeRecord record(int id) const;

 private:
  std::vector<Constraint> constraints_for(int id, AgentId agent) const;

  const Graph& graph_;
  const CostModel& model_;
  const State& state_;
  int horizon_;
  std::vector<Node> nodes_;
  std::vector<std::vector<VertexId>> paths_;
  std::vector<Cost> path_costs_;
};

// The two constraints that resolve `conflict`, one per involved agent.
std::pair<Constraint, Constraint> split_conflict(const Conflict& conflict);

MovementCommand extract_first_step(const JointTrajectory& joint);

/// Finite-horizon CBS: conflicts are resolved over the whole horizon and the
/// first conflict-free node is returned. Throws SearchError when the tree is
/// exhausted; falls back to PIBT when the budget runs out first.
StepResult fh_cbs_step(const Instance& instance, const State& state, int horizon, const Budget& budget,
                       const PriorityTable* priorities = nullptr, SearchObserver* observer = nullptr,
                       bool use_prioritized_conflicts = false);

/// Anytime closed-loop CBS step with a running horizon that grows from 1 to
/// H_max over a single constraint tree. Returns the incumbent's first move at
/// the deadline, or a PIBT move if no incumbent exists. Throws SearchError when
/// the tree is exhausted before any incumbent.
StepResult accbs_step(const Instance& instance, const State& state, const SearchConfig& config,
                      const PriorityTable* priorities = nullptr, SearchObserver* observer = nullptr);

}  // namespace accbs

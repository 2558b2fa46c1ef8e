#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "accbs/engine.hpp"
#include "accbs/instance.hpp"
#include "accbs/model.hpp"
#include "accbs/pibt.hpp"
#include "accbs/rng.hpp"

namespace accbs {

enum class EpisodeMode { kOneShot, kLifelong, kUncertain };
enum class ControllerKind { kAccbs, kFhCbs, kPibt };

std::string to_string(EpisodeMode mode);
std::string to_string(ControllerKind kind);
EpisodeMode parse_mode(const std::string& text);
ControllerKind parse_controller(const std::string& text);

// A scheduled arrival. Unset start/goal are drawn uniformly.
struct Arrival {
  int step = 0;
  std::optional<VertexId> start;
  std::optional<VertexId> goal;
  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct ScenarioConfig {
  EpisodeMode mode = EpisodeMode::kOneShot;
  std::string map_path;
  std::string scen_path;  // empty: agents drawn from the seed
  int num_agents = 1;
  ControllerKind controller = ControllerKind::kAccbs;
  int horizon = 1;  // fh-CBS planning horizon H
  SearchConfig search;
  int max_steps = 0;  // 0: 8 * max gamma(start) for one-shot, 1000 otherwise
  std::uint64_t seed = 1;
  double delay_p = 0.0;
  std::vector<Arrival> arrivals;
  int arrival_every = 0;  // uncertain mode: 0 selects the default of 50, negative disables

  void validate() const;
};

// Fills in mode-dependent defaults that do not need the instance.
ScenarioConfig resolve_defaults(ScenarioConfig config);

// Per controller call; everything except elapsed_ms is deterministic.
struct StepDiagnostics {
  int step = 0;
  std::int64_t expansions = 0;
  std::int64_t generated = 0;
  int reached_horizon = 0;
  std::optional<Cost> incumbent_cost;
  StepStatus status = StepStatus::kFallbackPibt;
  double elapsed_ms = 0.0;
};

enum class TerminalStatus { kAllAtGoal, kStepCap, kHorizonEnd, kAborted };
std::string to_string(TerminalStatus status);

struct Completion {
  AgentId agent = 0;
  int step = 0;
  friend bool operator==(const Completion&, const Completion&) = default;
};

struct EpisodeLog {
  Cost soc = 0;  // accumulated step by step while the episode runs
  std::vector<State> states;                      // x_0 .. x_T
  std::vector<std::vector<VertexId>> goals;       // goals in force at x_0 .. x_T
  std::vector<std::vector<VertexId>> planned;     // planned targets for steps 0 .. T-1
  std::vector<StepDiagnostics> diagnostics;       // one per controller call
  std::vector<Completion> completions;
  TerminalStatus status = TerminalStatus::kStepCap;
  std::string abort_reason;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

// Ignores wall-clock timing.
bool same_trajectory(const EpisodeLog& a, const EpisodeLog& b);

struct Metrics {
  Cost soc = 0;
  Cost soc_lower_bound = 0;  // sum of gamma(start) over the initial agents
  Cost soc_excess() const { return soc - soc_lower_bound; }
  int makespan = 0;
  double throughput = 0.0;
  double mean_plan_ms = 0.0;
  double p95_plan_ms = 0.0;
  double mean_hr = 0.0;
  std::int64_t expansions = 0;
  int steps = 0;
  int completions = 0;
  std::string status;
};

struct ControllerContext {
  const PriorityTable& priorities;
  int step = 0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual StepResult plan(const Instance& instance, const State& state, const ControllerContext& context) = 0;
};

std::unique_ptr<Controller> make_controller(const ScenarioConfig& config, SearchObserver* observer = nullptr);

/// Moves every agent along its planned edge unless delayed; delayed agents
/// stay, and any agent whose target is still occupied by a staying agent is
/// forced to stay as well, until no such agent remains.
State apply_actuator(const State& state, const MovementCommand& command, double delay_p, Rng& rng);
// Same, with the per-agent delay outcomes given explicitly.
State apply_actuator(const State& state, const MovementCommand& command, const std::vector<bool>& delayed);

// Builds the episode's starting instance from the config's files or seed.
Instance load_episode_instance(const ScenarioConfig& config);

struct EpisodeResult {
  EpisodeLog log;
  Metrics metrics;
};

EpisodeResult run_episode(const ScenarioConfig& config, SearchObserver* observer = nullptr);
EpisodeResult run_episode(const ScenarioConfig& config, const Instance& instance,
                          SearchObserver* observer = nullptr);
// Drives the loop with a caller-supplied controller (config.controller is ignored).
EpisodeResult run_episode(const ScenarioConfig& config, const Instance& instance, Controller& controller);

Metrics summarize(const EpisodeLog& log, EpisodeMode mode);

// SOC recomputed from the executed states and the goals in force.
Cost recompute_soc(const EpisodeLog& log);

/// Newline-delimited `step,agent,vertex,flag` records; flag is `P` for a
/// planned target and `E` for an executed position.
std::string serialize_log(const EpisodeLog& log);

std::string config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(const std::string& text);

/// Runs independent episodes on up to `threads` workers; results keep the
/// input order.
std::vector<EpisodeResult> run_batch(const std::vector<ScenarioConfig>& configs, int threads);

// ACCBS_THREADS if set and positive, else the hardware concurrency.
int default_thread_count();

}  // namespace accbs

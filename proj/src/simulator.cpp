#include "accbs/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace accbs {

namespace {

constexpr int kDefaultLifelongSteps = 1000;
constexpr int kDefaultArrivalEvery = 50;

}  // namespace

std::string to_string(EpisodeMode mode) {
  switch (mode) {
    case EpisodeMode::kOneShot:
      return "oneshot";
    case EpisodeMode::kLifelong:
      return "lifelong";
    case EpisodeMode::kUncertain:
      return "uncertain";
  }
  return "unknown";
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kAccbs:
      return "accbs";
    case ControllerKind::kFhCbs:
      return "fhcbs";
    case ControllerKind::kPibt:
      return "pibt";
  }
  return "unknown";
}

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::kAllAtGoal:
      return "all-at-goal";
    case TerminalStatus::kStepCap:
      return "step-cap";
    case TerminalStatus::kHorizonEnd:
      return "horizon-end";
    case TerminalStatus::kAborted:
      return "aborted";
  }
  return "unknown";
}

EpisodeMode parse_mode(const std::string& text) {
  if (text == "oneshot") return EpisodeMode::kOneShot;
  if (text == "lifelong") return EpisodeMode::kLifelong;
  if (text == "uncertain") return EpisodeMode::kUncertain;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

ControllerKind parse_controller(const std::string& text) {
  if (text == "accbs") return ControllerKind::kAccbs;
  if (text == "fhcbs" || text == "fh-cbs") return ControllerKind::kFhCbs;
  if (text == "pibt") return ControllerKind::kPibt;
  throw std::invalid_argument("unknown controller '" + text + "'");
}

void ScenarioConfig::validate() const {
  if (num_agents < 1) throw std::invalid_argument("agent count must be >= 1");
  if (max_steps < 0) throw std::invalid_argument("max steps must be >= 1");
  if (!(delay_p >= 0.0 && delay_p <= 1.0)) throw std::invalid_argument("delay probability must lie in [0, 1]");
  if (controller == ControllerKind::kFhCbs && horizon < 1) throw std::invalid_argument("fh-CBS horizon must be >= 1");
  search.validate();
  if (mode == EpisodeMode::kOneShot) {
    if (delay_p != 0.0) throw std::invalid_argument("one-shot episodes require delay probability 0");
    if (!arrivals.empty() || arrival_every > 0) throw std::invalid_argument("one-shot episodes take no arrivals");
  }
  for (const Arrival& a : arrivals) {
    if (a.step < 1) throw std::invalid_argument("arrival steps must be >= 1");
  }
}

ScenarioConfig resolve_defaults(ScenarioConfig config) {
  if (config.mode != EpisodeMode::kOneShot && config.max_steps == 0) config.max_steps = kDefaultLifelongSteps;
  if (config.mode == EpisodeMode::kUncertain && config.arrival_every == 0 && config.arrivals.empty()) {
    config.arrival_every = kDefaultArrivalEvery;
  }
  return config;
}

bool same_trajectory(const EpisodeLog& a, const EpisodeLog& b) {
  if (a.soc != b.soc || a.states != b.states || a.goals != b.goals || a.planned != b.planned || a.completions != b.completions ||
      a.status != b.status || a.abort_reason != b.abort_reason || a.diagnostics.size() != b.diagnostics.size()) {
    return false;
  }
  for (size_t i = 0; i < a.diagnostics.size(); ++i) {
    const auto& x = a.diagnostics[i];
    const auto& y = b.diagnostics[i];
    if (x.step != y.step || x.expansions != y.expansions || x.generated != y.generated ||
        x.reached_horizon != y.reached_horizon || x.incumbent_cost != y.incumbent_cost || x.status != y.status) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Controllers

namespace {

class AccbsController : public Controller {
 public:
  AccbsController(SearchConfig config, SearchObserver* observer) : config_(config), observer_(observer) {}
  StepResult plan(const Instance& instance, const State& state, const ControllerContext& context) override {
    return accbs_step(instance, state, config_, &context.priorities, observer_);
  }

 private:
  SearchConfig config_;
  SearchObserver* observer_;
};

class FhCbsController : public Controller {
 public:
  FhCbsController(int horizon, SearchConfig config, SearchObserver* observer)
      : horizon_(horizon), config_(config), observer_(observer) {}
  StepResult plan(const Instance& instance, const State& state, const ControllerContext& context) override {
    return fh_cbs_step(instance, state, horizon_, config_.budget, &context.priorities, observer_,
                       config_.use_prioritized_conflicts);
  }

 private:
  int horizon_;
  SearchConfig config_;
  SearchObserver* observer_;
};

class PibtController : public Controller {
 public:
  StepResult plan(const Instance& instance, const State& state, const ControllerContext& context) override {
    const auto start = std::chrono::steady_clock::now();
    StepResult result;
    result.movement = pibt_step(*instance.graph, make_cost_model(instance), state, context.priorities);
    result.status = StepStatus::kFallbackPibt;
    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  }
};

}  // namespace

std::unique_ptr<Controller> make_controller(const ScenarioConfig& config, SearchObserver* observer) {
  switch (config.controller) {
    case ControllerKind::kAccbs:
      return std::make_unique<AccbsController>(config.search, observer);
    case ControllerKind::kFhCbs:
      return std::make_unique<FhCbsController>(config.horizon, config.search, observer);
    case ControllerKind::kPibt:
      return std::make_unique<PibtController>();
  }
  throw std::invalid_argument("unknown controller");
}

// ---------------------------------------------------------------------------
// Actuator

State apply_actuator(const State& state, const MovementCommand& command, double delay_p, Rng& rng) {
  std::vector<bool> delayed(state.positions.size());
  for (size_t a = 0; a < delayed.size(); ++a) delayed[a] = bernoulli(rng, delay_p);
  return apply_actuator(state, command, delayed);
}

State apply_actuator(const State& state, const MovementCommand& command, const std::vector<bool>& delayed) {
  const int n = state.num_agents();
  if (static_cast<int>(command.moves.size()) != n || static_cast<int>(delayed.size()) != n) {
    throw std::invalid_argument("apply_actuator: command size does not match the state");
  }
  State next;
  next.time = state.time + 1;
  next.positions.resize(n);
  std::unordered_map<VertexId, AgentId> occupant;
  occupant.reserve(n * 2);
  for (AgentId a = 0; a < n; ++a) {
    if (command.moves[a].from != state.positions[a]) {
      throw std::invalid_argument("apply_actuator: move does not start at the agent's vertex");
    }
    occupant[state.positions[a]] = a;
    next.positions[a] = delayed[a] ? state.positions[a] : command.moves[a].to;
  }
  // A mover whose target is held by a staying agent must stay too; staying
  // can only block more movers, so iterate to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (AgentId a = 0; a < n; ++a) {
      const VertexId target = next.positions[a];
      if (target == state.positions[a]) continue;
      auto it = occupant.find(target);
      if (it == occupant.end()) continue;
      const AgentId b = it->second;
      if (next.positions[b] == state.positions[b]) {
        next.positions[a] = state.positions[a];
        changed = true;
      }
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// Episode loop

Instance load_episode_instance(const ScenarioConfig& config) {
  auto graph = std::make_shared<const Graph>(build_graph(load_map(config.map_path)));
  std::vector<AgentSpec> agents;
  if (config.scen_path.empty()) {
    Rng rng(derive_seed(config.seed, 2));
    agents = random_agents(*graph, config.num_agents, rng);
  } else {
    agents = load_scen(config.scen_path, config.num_agents, *graph);
  }
  Instance instance = make_instance(graph, std::move(agents));
  validate_instance(instance, true);
  return instance;
}

EpisodeResult run_episode(const ScenarioConfig& config, SearchObserver* observer) {
  return run_episode(config, load_episode_instance(config), observer);
}

namespace {

class Environment {
 public:
  Environment(const Graph& graph, std::uint64_t seed) : graph_(graph), rng_(seed) {
    for (VertexId v = 0; v < graph.num_vertices(); ++v) by_component_[graph.component(v)].push_back(v);
  }

  // Uniform over v's component, excluding v itself.
  VertexId fresh_goal(VertexId v) {
    const auto& pool = by_component_.at(graph_.component(v));
    if (pool.size() < 2) return v;
    VertexId g;
    do {
      g = pool[uniform_index(rng_, pool.size())];
    } while (g == v);
    return g;
  }

  // Uniform over vertices not in `blocked`; nullopt when none is free.
  std::optional<VertexId> free_vertex(const std::vector<char>& blocked) {
    std::vector<VertexId> free;
    for (VertexId v = 0; v < graph_.num_vertices(); ++v)
      if (!blocked[v]) free.push_back(v);
    if (free.empty()) return std::nullopt;
    return free[uniform_index(rng_, free.size())];
  }

 private:
  const Graph& graph_;
  Rng rng_;
  std::map<int, std::vector<VertexId>> by_component_;
};

void check_transition(const Graph& graph, const State& from, const State& to) {
  for (AgentId a = 0; a < from.num_agents(); ++a) {
    if (from.positions[a] != to.positions[a] && !graph.has_edge(from.positions[a], to.positions[a])) {
      throw std::logic_error("executed move of agent " + std::to_string(a) + " is not a graph edge");
    }
  }
  std::span<const VertexId> prev(from.positions.data(), from.positions.size());
  std::span<const VertexId> next(to.positions.data(), from.positions.size());
  if (auto c = transition_conflict(prev, next)) {
    throw std::logic_error("collision in executed state at step " + std::to_string(to.time) + ": " + c->describe());
  }
}

int makespan_of(const EpisodeLog& log) {
  int last_off = -1;
  for (int t = 0; t <= log.steps(); ++t) {
    const auto& pos = log.states[t].positions;
    for (size_t a = 0; a < pos.size(); ++a) {
      if (pos[a] != log.goals[t][a]) {
        last_off = t;
        break;
      }
    }
  }
  return std::min(last_off + 1, log.steps());
}

}  // namespace

Metrics summarize(const EpisodeLog& log, EpisodeMode mode) {
  Metrics m;
  m.soc = log.soc;
  m.makespan = makespan_of(log);
  m.steps = log.steps();
  m.completions = static_cast<int>(log.completions.size());
  m.status = to_string(log.status);
  const auto& final_state = log.states.back();
  const int n = final_state.num_agents();
  if (mode == EpisodeMode::kOneShot) {
    int at_goal = 0;
    for (int a = 0; a < n; ++a) at_goal += final_state.positions[a] == log.goals.back()[a];
    m.throughput = n > 0 ? static_cast<double>(at_goal) / n : 0.0;
  } else {
    m.throughput = n > 0 ? static_cast<double>(m.completions) / n : 0.0;
  }
  if (!log.diagnostics.empty()) {
    std::vector<double> ms;
    double hr = 0.0;
    for (const auto& d : log.diagnostics) {
      ms.push_back(d.elapsed_ms);
      hr += d.reached_horizon;
      m.expansions += d.expansions;
    }
    m.mean_plan_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
    m.mean_hr = hr / log.diagnostics.size();
    std::sort(ms.begin(), ms.end());
    // Nearest-rank percentile.
    const size_t rank = static_cast<size_t>(std::ceil(0.95 * ms.size()));
    m.p95_plan_ms = ms[std::max<size_t>(rank, 1) - 1];
  }
  return m;
}

EpisodeResult run_episode(const ScenarioConfig& config, const Instance& initial, SearchObserver* observer) {
  auto controller = make_controller(config, observer);
  return run_episode(config, initial, *controller);
}

EpisodeResult run_episode(const ScenarioConfig& raw_config, const Instance& initial, Controller& controller) {
  ScenarioConfig config = resolve_defaults(raw_config);
  config.validate();
  const Graph& graph = *initial.graph;
  auto distances = initial.distances;

  std::vector<VertexId> goals = initial.goals();
  State state = initial_state(initial);
  if (config.max_steps == 0) {
    Cost worst = 0;
    for (const auto& a : initial.agents) worst = std::max(worst, (*distances->get(a.goal))[a.start]);
    config.max_steps = std::max<Cost>(1, 8 * worst);
  }

  std::vector<Arrival> schedule = config.arrivals;
  if (config.arrival_every > 0) {
    for (int s = config.arrival_every; s < config.max_steps; s += config.arrival_every) schedule.push_back({s, {}, {}});
  }
  std::stable_sort(schedule.begin(), schedule.end(), [](const Arrival& a, const Arrival& b) { return a.step < b.step; });
  std::vector<Arrival> pending;
  size_t next_arrival = 0;

  Rng actuator_rng(derive_seed(config.seed, 0));
  Environment env(graph, derive_seed(config.seed, 1));
  PriorityTable priorities = PriorityTable::uniform(state.num_agents());
  const bool lifelong = config.mode != EpisodeMode::kOneShot;

  EpisodeResult result;
  EpisodeLog& log = result.log;
  log.states.push_back(state);
  log.goals.push_back(goals);

  auto current_instance = [&]() {
    Instance inst;
    inst.graph = initial.graph;
    inst.distances = distances;
    inst.agents.resize(goals.size());
    for (AgentId a = 0; a < static_cast<AgentId>(goals.size()); ++a) inst.agents[a] = {a, state.positions[a], goals[a]};
    return inst;
  };

  for (;;) {
    if (state.time >= config.max_steps) {
      log.status = lifelong ? TerminalStatus::kHorizonEnd : TerminalStatus::kStepCap;
      break;
    }
    const Instance inst = current_instance();
    StepResult step;
    try {
      step = controller.plan(inst, state, ControllerContext{priorities, state.time});
    } catch (const SearchError& e) {
      log.status = TerminalStatus::kAborted;
      log.abort_reason = e.what();
      break;
    }
    log.diagnostics.push_back({state.time, step.expansions, step.generated, step.reached_horizon, step.incumbent_cost,
                               step.status, step.elapsed_ms});
    const MovementCommand& cmd = step.movement;
    if (static_cast<int>(cmd.moves.size()) != state.num_agents()) {
      throw std::logic_error("controller returned a command of the wrong size");
    }
    if (!lifelong && cmd.all_wait() && state.positions == goals) {
      log.status = TerminalStatus::kAllAtGoal;
      break;
    }
    {
      // Planned commands must already be collision-free.
      State planned_state{cmd.targets(), state.time + 1};
      check_transition(graph, state, planned_state);
    }

    for (size_t a = 0; a < goals.size(); ++a) log.soc += state.positions[a] != goals[a];
    State next = apply_actuator(state, cmd, config.delay_p, actuator_rng);
    check_transition(graph, state, next);
    log.planned.push_back(cmd.targets());

    if (lifelong) {
      for (AgentId a = 0; a < next.num_agents(); ++a) {
        if (next.positions[a] == goals[a]) {
          log.completions.push_back({a, next.time});
          goals[a] = env.fresh_goal(goals[a]);
        }
      }
      while (next_arrival < schedule.size() && schedule[next_arrival].step <= next.time) {
        pending.push_back(schedule[next_arrival++]);
      }
      std::vector<Arrival> deferred;
      for (const Arrival& arrival : pending) {
        std::vector<char> blocked(graph.num_vertices(), 0);
        for (VertexId v : next.positions) blocked[v] = 1;
        for (VertexId v : log.planned.back()) blocked[v] = 1;
        std::optional<VertexId> start = arrival.start;
        if (start && (!graph.contains(*start) || blocked[*start])) start.reset();
        if (!start && arrival.start) {
          deferred.push_back(arrival);
          continue;
        }
        if (!start) start = env.free_vertex(blocked);
        if (!start) {
          deferred.push_back(arrival);
          continue;
        }
        VertexId goal = arrival.goal.value_or(kNoVertex);
        if (goal == kNoVertex || !graph.contains(goal) || graph.component(goal) != graph.component(*start) ||
            goal == *start) {
          goal = env.fresh_goal(*start);
        }
        next.positions.push_back(*start);
        goals.push_back(goal);
      }
      pending = std::move(deferred);
    }

    priorities.update(next, goals);
    state = std::move(next);
    log.states.push_back(state);
    log.goals.push_back(goals);
  }

  result.metrics = summarize(log, config.mode);
  for (const auto& a : initial.agents) result.metrics.soc_lower_bound += (*distances->get(a.goal))[a.start];
  return result;
}

Cost recompute_soc(const EpisodeLog& log) {
  Cost soc = 0;
  for (int t = 0; t < log.steps(); ++t) {
    const auto& pos = log.states[t].positions;
    for (size_t a = 0; a < pos.size(); ++a) soc += pos[a] != log.goals[t][a];
  }
  return soc;
}

std::string serialize_log(const EpisodeLog& log) {
  std::ostringstream out;
  out << "step,agent,vertex,flag\n";
  for (int t = 0; t <= log.steps(); ++t) {
    if (t > 0) {
      const auto& plan = log.planned[t - 1];
      for (size_t a = 0; a < plan.size(); ++a) out << t << ',' << a << ',' << plan[a] << ",P\n";
    }
    const auto& pos = log.states[t].positions;
    for (size_t a = 0; a < pos.size(); ++a) out << t << ',' << a << ',' << pos[a] << ",E\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Metadata

std::string config_to_json(const ScenarioConfig& config) {
  using nlohmann::json;
  json j;
  j["mode"] = to_string(config.mode);
  j["map"] = config.map_path;
  j["scen"] = config.scen_path;
  j["agents"] = config.num_agents;
  j["controller"] = to_string(config.controller);
  j["horizon"] = config.horizon;
  j["hmax"] = config.search.max_horizon;
  j["budget_kind"] = config.search.budget.deterministic() ? "expansions" : "ms";
  j["budget"] = config.search.budget.amount;
  j["prioritized_conflicts"] = config.search.use_prioritized_conflicts;
  j["max_steps"] = config.max_steps;
  j["seed"] = config.seed;
  j["delay_p"] = config.delay_p;
  j["arrival_every"] = config.arrival_every;
  j["arrivals"] = json::array();
  for (const auto& a : config.arrivals) {
    json e;
    e["step"] = a.step;
    e["start"] = a.start ? json(*a.start) : json(nullptr);
    e["goal"] = a.goal ? json(*a.goal) : json(nullptr);
    j["arrivals"].push_back(e);
  }
  j["reproducible"] = config.search.budget.deterministic();
  return j.dump(2);
}

ScenarioConfig config_from_json(const std::string& text) {
  using nlohmann::json;
  const json j = json::parse(text);
  ScenarioConfig c;
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.map_path = j.at("map").get<std::string>();
  c.scen_path = j.at("scen").get<std::string>();
  c.num_agents = j.at("agents").get<int>();
  c.controller = parse_controller(j.at("controller").get<std::string>());
  c.horizon = j.at("horizon").get<int>();
  c.search.max_horizon = j.at("hmax").get<int>();
  const auto amount = j.at("budget").get<std::int64_t>();
  const auto kind = j.at("budget_kind").get<std::string>();
  if (kind == "expansions") {
    c.search.budget = Budget::expansions(amount);
  } else if (kind == "ms") {
    c.search.budget = Budget::wall_clock_ms(amount);
  } else {
    throw std::invalid_argument("unknown budget kind '" + kind + "'");
  }
  c.search.use_prioritized_conflicts = j.value("prioritized_conflicts", false);
  c.max_steps = j.at("max_steps").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.delay_p = j.at("delay_p").get<double>();
  c.arrival_every = j.value("arrival_every", 0);
  for (const auto& e : j.value("arrivals", json::array())) {
    Arrival a;
    a.step = e.at("step").get<int>();
    if (!e.at("start").is_null()) a.start = e.at("start").get<VertexId>();
    if (!e.at("goal").is_null()) a.goal = e.at("goal").get<VertexId>();
    c.arrivals.push_back(a);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Batch runner

int default_thread_count() {
  if (const char* env = std::getenv("ACCBS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<EpisodeResult> run_batch(const std::vector<ScenarioConfig>& configs, int threads) {
  std::vector<EpisodeResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_episode(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int count = std::clamp<int>(threads, 1, std::max<int>(1, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace accbs

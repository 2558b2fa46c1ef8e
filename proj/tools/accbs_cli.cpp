#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <queue>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "accbs/oracles.hpp"
#include "accbs/report.hpp"
#include "accbs/simulator.hpp"

namespace fs = std::filesystem;
using namespace accbs;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string absolute_or_empty(const std::string& p) { return p.empty() ? p : fs::absolute(p).lexically_normal().string(); }

void print_summary(const Metrics& m) {
  std::cout << "soc=" << m.soc << " soc_excess=" << m.soc_excess() << " makespan=" << m.makespan << " throughput=" << m.throughput
            << " mean_hr=" << m.mean_hr << " expansions=" << m.expansions << " mean_plan_ms=" << m.mean_plan_ms
            << " p95_plan_ms=" << m.p95_plan_ms << " steps=" << m.steps << " status=" << m.status << '\n';
}

struct RunOptions {
  std::string map, scen, controller = "accbs", mode = "oneshot", out, from_metadata;
  int agents = 0, hmax = 1, horizon = 0, max_steps = 0, arrival_every = 0;
  std::optional<std::int64_t> budget_ms, budget_expansions;
  std::uint64_t seed = 1;
  double delay_p = 0.0;
  bool prioritized = false;
};

int cmd_run(const RunOptions& o) {
  ScenarioConfig config;
  if (!o.from_metadata.empty()) {
    config = config_from_json(read_file(o.from_metadata));
  } else {
    if (o.map.empty()) throw CLI::ValidationError("--map", "is required");
    config.mode = parse_mode(o.mode);
    config.map_path = absolute_or_empty(o.map);
    config.scen_path = absolute_or_empty(o.scen);
    config.num_agents = o.agents;
    config.controller = parse_controller(o.controller);
    config.search.max_horizon = o.hmax;
    config.horizon = o.horizon > 0 ? o.horizon : o.hmax;
    if (o.budget_ms && o.budget_expansions) {
      throw CLI::ValidationError("--budget-ms", "cannot be combined with --budget-expansions");
    }
    if (o.budget_ms) config.search.budget = Budget::wall_clock_ms(*o.budget_ms);
    if (o.budget_expansions) config.search.budget = Budget::expansions(*o.budget_expansions);
    config.search.use_prioritized_conflicts = o.prioritized;
    config.seed = o.seed;
    config.max_steps = o.max_steps;
    config.delay_p = o.delay_p;
    config.arrival_every = o.arrival_every;
    config = resolve_defaults(config);
    try {
      config.validate();
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError(e.what());
    }
  }

  const EpisodeResult result = run_episode(config);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "episode.csv") << serialize_log(result.log);
    std::ofstream(fs::path(o.out) / "metadata.json") << config_to_json(config) << '\n';
    std::ofstream(fs::path(o.out) / "summary.csv") << kCsvHeader << '\n' << csv_row(config, result.metrics) << '\n';
  }
  print_summary(result.metrics);
  if (result.log.status == TerminalStatus::kAborted) {
    std::cerr << "episode aborted: " << result.log.abort_reason << '\n';
    return 1;
  }
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out, int threads) {
  const SweepSpec spec = parse_sweep_spec(read_file(spec_path));
  const auto configs = expand_sweep(spec);
  if (threads <= 0) threads = default_thread_count();
  std::cerr << "running " << configs.size() << " episodes on " << threads << " workers\n";
  const auto results = run_batch(configs, threads);
  std::vector<Metrics> metrics;
  for (const auto& r : results) metrics.push_back(r.metrics);
  write_sweep_outputs(out, configs, metrics);
  std::cout << aggregate_csv(aggregate(configs, metrics));
  return 0;
}

// Random obstacles, each accepted only if the free cells stay connected.
int cmd_gen_map(int width, int height, int obstacles, std::uint64_t seed, const std::string& out) {
  if (width < 1 || height < 1 || obstacles < 0 || obstacles >= width * height) {
    throw CLI::ValidationError("bad map dimensions or obstacle count");
  }
  Rng rng(seed);
  std::vector<char> blocked(width * height, 0);
  auto connected = [&]() {
    int free_count = 0, first = -1;
    for (int i = 0; i < width * height; ++i)
      if (!blocked[i]) ++free_count, first = first < 0 ? i : first;
    std::vector<char> seen(width * height, 0);
    std::queue<int> q;
    q.push(first);
    seen[first] = 1;
    int reached = 0;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      ++reached;
      const int r = c / width, col = c % width;
      const int nb[4][2] = {{r - 1, col}, {r + 1, col}, {r, col - 1}, {r, col + 1}};
      for (auto [nr, nc] : nb) {
        if (nr < 0 || nc < 0 || nr >= height || nc >= width) continue;
        const int id = nr * width + nc;
        if (!blocked[id] && !seen[id]) seen[id] = 1, q.push(id);
      }
    }
    return reached == free_count;
  };
  int placed = 0, attempts = 0;
  while (placed < obstacles) {
    if (++attempts > 100 * width * height) throw std::runtime_error("could not place obstacles connectedly");
    const int cell = static_cast<int>(uniform_index(rng, width * height));
    if (blocked[cell]) continue;
    blocked[cell] = 1;
    if (connected()) {
      ++placed;
    } else {
      blocked[cell] = 0;
    }
  }
  std::ofstream f(out);
  f << "type octile\nheight " << height << "\nwidth " << width << "\nmap\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) f << (blocked[r * width + c] ? '@' : '.');
    f << '\n';
  }
  return 0;
}

int cmd_gen_scen(const std::string& map_path, int count, std::uint64_t seed, const std::string& out) {
  auto graph = std::make_shared<const Graph>(build_graph(load_map(map_path)));
  Rng rng(seed);
  const auto agents = random_agents(*graph, count, rng);
  DistanceCache cache(graph);
  std::ofstream f(out);
  f << "version 1\n";
  const std::string name = fs::path(map_path).filename().string();
  for (const auto& a : agents) {
    const Cell s = graph->cell(a.start), g = graph->cell(a.goal);
    f << 0 << '\t' << name << '\t' << graph->width() << '\t' << graph->height() << '\t' << s.col << '\t' << s.row
      << '\t' << g.col << '\t' << g.row << '\t' << (*cache.get(a.goal))[a.start] << '\n';
  }
  return 0;
}

int cmd_oracle(const std::string& map_path, const std::string& scen_path, int agents, std::int64_t node_limit,
               const std::string& fixture) {
  auto graph = std::make_shared<const Graph>(build_graph(load_map(map_path)));
  Instance inst = make_instance(graph, load_scen(scen_path, agents, *graph));
  validate_instance(inst);
  const OracleSolution sol = classic_cbs(inst, node_limit);
  std::cout << "soc=" << sol.soc << " makespan=" << sol.makespan << '\n';
  if (!fixture.empty()) {
    std::vector<OracleRecord> records;
    if (fs::exists(fixture)) records = read_oracle_fixture(fixture);
    OracleRecord rec{fs::path(map_path).stem().string(), fs::path(scen_path).filename().string(), agents, sol.soc,
                     sol.makespan};
    std::erase_if(records, [&](const OracleRecord& r) {
      return r.map_id == rec.map_id && r.scen_id == rec.scen_id && r.agents == rec.agents;
    });
    records.push_back(rec);
    write_oracle_fixture(fixture, records);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop multi-agent path finding with adaptive-horizon CBS"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run one episode");
  run_cmd->add_option("--map", run.map, "MovingAI .map file");
  run_cmd->add_option("--scen", run.scen, "MovingAI .scen file (omit to draw agents from the seed)");
  run_cmd->add_option("--agents", run.agents, "Number of agents");
  run_cmd->add_option("--controller", run.controller, "accbs | fhcbs | pibt")
      ->check(CLI::IsMember({"accbs", "fhcbs", "fh-cbs", "pibt"}));
  run_cmd->add_option("--hmax", run.hmax, "Maximum horizon H_max");
  run_cmd->add_option("--horizon", run.horizon, "fh-CBS horizon H (defaults to --hmax)");
  run_cmd->add_option("--budget-ms", run.budget_ms, "Wall-clock budget per step (ms)");
  run_cmd->add_option("--budget-expansions", run.budget_expansions, "Expansion budget per step");
  run_cmd->add_option("--mode", run.mode, "oneshot | lifelong | uncertain")
      ->check(CLI::IsMember({"oneshot", "lifelong", "uncertain"}));
  run_cmd->add_option("--seed", run.seed, "RNG seed");
  run_cmd->add_option("--max-steps", run.max_steps, "Step cap (0 = mode default)");
  run_cmd->add_option("--delay-p", run.delay_p, "Per agent-step delay probability");
  run_cmd->add_option("--arrival-every", run.arrival_every, "Arrival period in steps (uncertain mode)");
  run_cmd->add_flag("--prioritized-conflicts", run.prioritized, "Use prioritized conflict selection");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--from-metadata", run.from_metadata, "Rerun the episode described by a metadata.json");

  std::string sweep_spec, sweep_out = "sweep_out";
  int sweep_threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep_cmd->add_option("spec", sweep_spec, "Sweep spec file")->required();
  sweep_cmd->add_option("--out", sweep_out, "Output directory");
  sweep_cmd->add_option("--threads", sweep_threads, "Worker count (default: ACCBS_THREADS or all cores)");

  int gm_width = 8, gm_height = 8, gm_obstacles = 0;
  std::uint64_t gm_seed = 1;
  std::string gm_out;
  auto* gen_map = app.add_subcommand("gen-map", "Generate a random connected grid map");
  gen_map->add_option("--width", gm_width)->required();
  gen_map->add_option("--height", gm_height)->required();
  gen_map->add_option("--obstacles", gm_obstacles, "Number of blocked cells");
  gen_map->add_option("--seed", gm_seed);
  gen_map->add_option("--out", gm_out)->required();

  std::string gs_map, gs_out;
  int gs_count = 0;
  std::uint64_t gs_seed = 1;
  auto* gen_scen = app.add_subcommand("gen-scen", "Generate a random scenario file");
  gen_scen->add_option("--map", gs_map)->required();
  gen_scen->add_option("--count", gs_count)->required();
  gen_scen->add_option("--seed", gs_seed);
  gen_scen->add_option("--out", gs_out)->required();

  std::string or_map, or_scen, or_fixture;
  int or_agents = 0;
  std::int64_t or_limit = 200000;
  auto* oracle = app.add_subcommand("oracle", "Solve an instance with classic CBS");
  oracle->add_option("--map", or_map)->required();
  oracle->add_option("--scen", or_scen)->required();
  oracle->add_option("--agents", or_agents)->required();
  oracle->add_option("--node-limit", or_limit);
  oracle->add_option("--fixture", or_fixture, "Append the result to this fixture file");

  try {
    app.parse(argc, argv);
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep_spec, sweep_out, sweep_threads);
    if (*gen_map) return cmd_gen_map(gm_width, gm_height, gm_obstacles, gm_seed, gm_out);
    if (*gen_scen) return cmd_gen_scen(gs_map, gs_count, gs_seed, gs_out);
    if (*oracle) return cmd_oracle(or_map, or_scen, or_agents, or_limit, or_fixture);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

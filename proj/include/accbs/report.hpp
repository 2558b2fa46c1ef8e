#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "accbs/simulator.hpp"

namespace accbs {

inline constexpr const char* kCsvHeader =
    "map,scen,n,controller,hmax,budget_kind,budget,seed,mode,soc,soc_excess,makespan,throughput,mean_plan_ms,p95_plan_ms,"
    "mean_hr,expansions,status";

std::string csv_row(const ScenarioConfig& config, const Metrics& metrics);

/// Sweep description. Plain text, one `key = v1, v2, ...` per line, `#`
/// comments. List keys: maps, scens, agents, controllers, horizons, budgets,
/// seeds (ranges `a..b` allowed). Scalar keys: mode, budget_kind
/// (expansions|ms), repetitions, max_steps, delay_p, prioritized, cap.
/// `scens` pairs with `maps` by position; `-` draws agents from the seed.
struct SweepSpec {
  std::vector<std::string> maps;
  std::vector<std::string> scens;
  std::vector<int> agents;
  std::vector<ControllerKind> controllers;
  std::vector<int> horizons;
  std::vector<std::int64_t> budgets;
  std::vector<std::uint64_t> seeds;
  bool budget_in_ms = false;
  int repetitions = 1;
  EpisodeMode mode = EpisodeMode::kOneShot;
  int max_steps = 0;
  double delay_p = 0.0;
  bool prioritized = false;
  std::int64_t cap = 5000;

  std::int64_t product_size() const;
};

SweepSpec parse_sweep_spec(std::string_view text);

// Throws std::invalid_argument naming the product size when it exceeds the cap.
std::vector<ScenarioConfig> expand_sweep(const SweepSpec& spec);

struct CellAggregate {
  std::string map;
  int n = 0;
  std::string controller;
  int horizon = 0;
  std::string budget_kind;
  std::int64_t budget = 0;
  int episodes = 0;
  double soc_mean = 0, soc_std = 0;
  double soc_excess_mean = 0, soc_excess_std = 0;
  double makespan_mean = 0, makespan_std = 0;
  double throughput_mean = 0, throughput_std = 0;
  double plan_ms_mean = 0, plan_ms_std = 0;
  double expansions_mean = 0, expansions_std = 0;
};

// Cells keep first-appearance order; stddev is the sample deviation.
std::vector<CellAggregate> aggregate(const std::vector<ScenarioConfig>& configs, const std::vector<Metrics>& metrics);
std::string aggregate_csv(const std::vector<CellAggregate>& cells);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, bool log_x);

/// Writes episodes.csv, aggregate.csv and the SVG plots to `out`.
void write_sweep_outputs(const std::filesystem::path& out, const std::vector<ScenarioConfig>& configs,
                         const std::vector<Metrics>& metrics);

}  // namespace accbs

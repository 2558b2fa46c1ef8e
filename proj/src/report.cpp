#include "accbs/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace accbs {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  T value{};
  if (!(in >> value) || !in.eof()) throw std::invalid_argument("sweep: bad value '" + text + "' for " + key);
  return value;
}

// Accepts `a..b` ranges for integer lists.
template <typename T>
std::vector<T> parse_int_list(const std::vector<std::string>& items, const std::string& key) {
  std::vector<T> out;
  for (const auto& item : items) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number<T>(item, key));
      continue;
    }
    const T lo = parse_number<T>(trim(item.substr(0, dots)), key);
    const T hi = parse_number<T>(trim(item.substr(dots + 2)), key);
    if (hi < lo) throw std::invalid_argument("sweep: empty range '" + item + "' for " + key);
    for (T v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::string map_label(const std::string& path) { return std::filesystem::path(path).stem().string(); }

std::string scen_label(const std::string& path) {
  return path.empty() ? "-" : std::filesystem::path(path).filename().string();
}

int effective_horizon(const ScenarioConfig& c) {
  return c.controller == ControllerKind::kFhCbs ? c.horizon : c.search.max_horizon;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string csv_row(const ScenarioConfig& c, const Metrics& m) {
  std::ostringstream out;
  out << map_label(c.map_path) << ',' << scen_label(c.scen_path) << ',' << c.num_agents << ','
      << to_string(c.controller) << ',' << effective_horizon(c) << ','
      << (c.search.budget.deterministic() ? "expansions" : "ms") << ',' << c.search.budget.amount << ',' << c.seed
      << ',' << to_string(c.mode) << ',' << m.soc << ',' << m.soc_excess() << ',' << m.makespan << ',' << fmt(m.throughput) << ','
      << fmt(m.mean_plan_ms) << ',' << fmt(m.p95_plan_ms) << ',' << fmt(m.mean_hr) << ',' << m.expansions << ','
      << m.status;
  return out.str();
}

std::int64_t SweepSpec::product_size() const {
  const std::int64_t dims[] = {static_cast<std::int64_t>(maps.size()),     static_cast<std::int64_t>(agents.size()),
                               static_cast<std::int64_t>(controllers.size()), static_cast<std::int64_t>(horizons.size()),
                               static_cast<std::int64_t>(budgets.size()),  static_cast<std::int64_t>(seeds.size()),
                               repetitions};
  std::int64_t total = 1;
  for (auto d : dims) {
    if (d > 0 && total > std::numeric_limits<std::int64_t>::max() / d) return std::numeric_limits<std::int64_t>::max();
    total *= d;
  }
  return total;
}

SweepSpec parse_sweep_spec(std::string_view text) {
  SweepSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("sweep: line " + std::to_string(line_no) + ": expected key = values");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto items = split_list(value);
    if (key == "maps") {
      spec.maps = items;
    } else if (key == "scens") {
      spec.scens = items;
    } else if (key == "agents") {
      spec.agents = parse_int_list<int>(items, key);
    } else if (key == "controllers") {
      spec.controllers.clear();
      for (const auto& item : items) spec.controllers.push_back(parse_controller(item));
    } else if (key == "horizons") {
      spec.horizons = parse_int_list<int>(items, key);
    } else if (key == "budgets") {
      spec.budgets = parse_int_list<std::int64_t>(items, key);
    } else if (key == "seeds") {
      spec.seeds = parse_int_list<std::uint64_t>(items, key);
    } else if (key == "budget_kind") {
      if (value == "expansions") {
        spec.budget_in_ms = false;
      } else if (value == "ms") {
        spec.budget_in_ms = true;
      } else {
        throw std::invalid_argument("sweep: budget_kind must be expansions or ms");
      }
    } else if (key == "repetitions") {
      spec.repetitions = parse_number<int>(value, key);
    } else if (key == "mode") {
      spec.mode = parse_mode(value);
    } else if (key == "max_steps") {
      spec.max_steps = parse_number<int>(value, key);
    } else if (key == "delay_p") {
      spec.delay_p = parse_number<double>(value, key);
    } else if (key == "prioritized") {
      spec.prioritized = value == "true" || value == "1";
    } else if (key == "cap") {
      spec.cap = parse_number<std::int64_t>(value, key);
    } else {
      throw std::invalid_argument("sweep: line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return spec;
}

std::vector<ScenarioConfig> expand_sweep(const SweepSpec& spec) {
  const std::pair<const char*, bool> required[] = {
      {"maps", spec.maps.empty()},         {"agents", spec.agents.empty()},   {"controllers", spec.controllers.empty()},
      {"horizons", spec.horizons.empty()}, {"budgets", spec.budgets.empty()}, {"seeds", spec.seeds.empty()}};
  for (const auto& [name, empty] : required) {
    if (empty) throw std::invalid_argument(std::string("sweep: list '") + name + "' is empty");
  }
  if (spec.repetitions < 1) throw std::invalid_argument("sweep: repetitions must be >= 1");
  if (!spec.scens.empty() && spec.scens.size() != spec.maps.size()) {
    throw std::invalid_argument("sweep: scens must pair one-to-one with maps");
  }
  const std::int64_t size = spec.product_size();
  if (size > spec.cap) {
    throw std::invalid_argument("sweep: " + std::to_string(size) + " episodes exceed the cap of " +
                                std::to_string(spec.cap));
  }

  std::vector<ScenarioConfig> out;
  out.reserve(size);
  for (size_t m = 0; m < spec.maps.size(); ++m) {
    for (int n : spec.agents) {
      for (ControllerKind controller : spec.controllers) {
        for (int h : spec.horizons) {
          for (std::int64_t budget : spec.budgets) {
            for (std::uint64_t seed : spec.seeds) {
              for (int rep = 0; rep < spec.repetitions; ++rep) {
                ScenarioConfig c;
                c.mode = spec.mode;
                c.map_path = spec.maps[m];
                if (!spec.scens.empty() && spec.scens[m] != "-") c.scen_path = spec.scens[m];
                c.num_agents = n;
                c.controller = controller;
                c.horizon = h;
                c.search.max_horizon = h;
                c.search.budget = spec.budget_in_ms ? Budget::wall_clock_ms(budget) : Budget::expansions(budget);
                c.search.use_prioritized_conflicts = spec.prioritized;
                c.max_steps = spec.max_steps;
                c.seed = spec.repetitions == 1 ? seed : derive_seed(seed, rep);
                c.delay_p = spec.delay_p;
                c.validate();
                out.push_back(std::move(c));
              }
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<CellAggregate> aggregate(const std::vector<ScenarioConfig>& configs, const std::vector<Metrics>& metrics) {
  if (configs.size() != metrics.size()) throw std::invalid_argument("aggregate: size mismatch");
  using Key = std::tuple<std::string, int, std::string, int, std::string, std::int64_t>;
  std::map<Key, size_t> index;
  std::vector<CellAggregate> cells;
  std::vector<std::vector<const Metrics*>> members;
  for (size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    Key key{map_label(c.map_path), c.num_agents, to_string(c.controller), effective_horizon(c),
            c.search.budget.deterministic() ? "expansions" : "ms", c.search.budget.amount};
    auto [it, inserted] = index.emplace(key, cells.size());
    if (inserted) {
      CellAggregate cell;
      std::tie(cell.map, cell.n, cell.controller, cell.horizon, cell.budget_kind, cell.budget) = key;
      cells.push_back(cell);
      members.emplace_back();
    }
    members[it->second].push_back(&metrics[i]);
  }
  auto stats = [](const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1)) : 0.0;
  };
  for (size_t k = 0; k < cells.size(); ++k) {
    auto& cell = cells[k];
    const auto& ms = members[k];
    cell.episodes = static_cast<int>(ms.size());
    std::vector<double> soc, excess, mk, tp, plan, exp;
    for (const Metrics* m : ms) {
      soc.push_back(m->soc);
      excess.push_back(m->soc_excess());
      mk.push_back(m->makespan);
      tp.push_back(m->throughput);
      plan.push_back(m->mean_plan_ms);
      exp.push_back(static_cast<double>(m->expansions));
    }
    stats(soc, cell.soc_mean, cell.soc_std);
    stats(excess, cell.soc_excess_mean, cell.soc_excess_std);
    stats(mk, cell.makespan_mean, cell.makespan_std);
    stats(tp, cell.throughput_mean, cell.throughput_std);
    stats(plan, cell.plan_ms_mean, cell.plan_ms_std);
    stats(exp, cell.expansions_mean, cell.expansions_std);
  }
  return cells;
}

std::string aggregate_csv(const std::vector<CellAggregate>& cells) {
  std::ostringstream out;
  out << "map,n,controller,hmax,budget_kind,budget,episodes,soc_mean,soc_std,soc_excess_mean,soc_excess_std,makespan_mean,makespan_std,"
         "throughput_mean,throughput_std,plan_ms_mean,plan_ms_std,expansions_mean,expansions_std\n";
  for (const auto& c : cells) {
    out << c.map << ',' << c.n << ',' << c.controller << ',' << c.horizon << ',' << c.budget_kind << ',' << c.budget
        << ',' << c.episodes << ',' << fmt(c.soc_mean) << ',' << fmt(c.soc_std) << ',' << fmt(c.soc_excess_mean) << ','
        << fmt(c.soc_excess_std) << ',' << fmt(c.makespan_mean) << ','
        << fmt(c.makespan_std) << ',' << fmt(c.throughput_mean) << ',' << fmt(c.throughput_std) << ','
        << fmt(c.plan_ms_mean) << ',' << fmt(c.plan_ms_std) << ',' << fmt(c.expansions_mean) << ','
        << fmt(c.expansions_std) << '\n';
  }
  return out.str();
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, bool log_x) {
  constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 60;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  auto xmap = [&](double x) { return log_x ? std::log10(std::max(x, 1e-9)) : x; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      x0 = std::min(x0, xmap(x));
      x1 = std::max(x1, xmap(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = (y1 - y0) * 0.05;
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (xmap(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4;
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
    const double xv = x0 + (x1 - x0) * i / 4;
    const double shown = log_x ? std::pow(10.0, xv) : xv;
    const double xpix = L + (xv - x0) / (x1 - x0) * (W - L - R);
    out << "<text x=\"" << xpix << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(shown) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << (log_x ? " (log scale)" : "") << "</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    auto pts = series[i].points;
    std::sort(pts.begin(), pts.end());
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : pts) out << px(x) << ',' << py(y) << ' ';
    out << "\"/>\n";
    for (auto [x, y] : pts) out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = T + 16 * i + 8;
    out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[i].label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_sweep_outputs(const std::filesystem::path& out, const std::vector<ScenarioConfig>& configs,
                         const std::vector<Metrics>& metrics) {
  std::filesystem::create_directories(out);
  {
    std::ofstream f(out / "episodes.csv");
    f << kCsvHeader << '\n';
    for (size_t i = 0; i < configs.size(); ++i) f << csv_row(configs[i], metrics[i]) << '\n';
  }
  const auto cells = aggregate(configs, metrics);
  std::ofstream(out / "aggregate.csv") << aggregate_csv(cells);

  // Budget charts: one series per (map, n, controller, horizon).
  std::map<std::string, Series> soc, tp;
  // Horizon chart: one series per (map, n, controller, budget).
  std::map<std::string, Series> plan;
  for (const auto& c : cells) {
    const std::string base = c.map + " n=" + std::to_string(c.n) + " " + c.controller;
    const std::string by_budget = base + " h=" + std::to_string(c.horizon);
    soc[by_budget].label = by_budget;
    soc[by_budget].points.emplace_back(static_cast<double>(c.budget), c.soc_mean);
    tp[by_budget].label = by_budget;
    tp[by_budget].points.emplace_back(static_cast<double>(c.budget), c.throughput_mean);
    const std::string by_h = base + " b=" + std::to_string(c.budget);
    plan[by_h].label = by_h;
    plan[by_h].points.emplace_back(c.horizon, c.plan_ms_mean);
  }
  auto values = [](const std::map<std::string, Series>& m) {
    std::vector<Series> v;
    for (const auto& [k, s] : m) v.push_back(s);
    return v;
  };
  const std::string unit = cells.empty() || cells.front().budget_kind == "expansions" ? "budget (expansions)"
                                                                                       : "budget (ms)";
  std::ofstream(out / "budget_soc.svg") << svg_line_chart("SOC vs budget", unit, "mean SOC", values(soc), true);
  std::ofstream(out / "budget_throughput.svg")
      << svg_line_chart("Throughput vs budget", unit, "mean throughput", values(tp), true);
  std::ofstream(out / "horizon_plan_time.svg")
      << svg_line_chart("Planning time vs horizon", "horizon", "mean planning time per step (ms)", values(plan), false);
}

}  // namespace accbs

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "accbs/instance.hpp"
#include "accbs/model.hpp"

namespace accbs {

// Ground-truth solvers used by the test suites. Both are deliberately
// independent of the engine's constraint tree and conflict scanner.

struct OracleSolution {
  JointTrajectory joint;  // trimmed to the makespan, every agent ends on its goal
  Cost soc = 0;
  int makespan = 0;
};

class OracleTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classic SOC-optimal CBS. The unbounded horizon is realized as
/// H = |V| + N with the same constrained low-level planner as the engine.
/// Throws OracleTimeout after `node_limit` expansions and SearchError-like
/// std::runtime_error if the instance has no solution.
OracleSolution classic_cbs(const Instance& instance, std::int64_t node_limit);

/// Exact minimum-J_H conflict-free joint trajectory by dynamic programming over
/// every joint configuration and step. Refuses (std::invalid_argument) unless
/// N <= 3, |V| <= 16 and H <= 6.
std::optional<std::pair<JointTrajectory, Cost>> brute_force_joint(const Instance& instance, int horizon);
std::optional<std::pair<JointTrajectory, Cost>> brute_force_joint(const Instance& instance, const State& state,
                                                                  int horizon);

// Tab-separated oracle cache: map id, scen id, N, soc, makespan.
struct OracleRecord {
  std::string map_id;
  std::string scen_id;
  int agents = 0;
  Cost soc = 0;
  int makespan = 0;
  friend bool operator==(const OracleRecord&, const OracleRecord&) = default;
};

std::vector<OracleRecord> read_oracle_fixture(const std::filesystem::path& path);
void write_oracle_fixture(const std::filesystem::path& path, const std::vector<OracleRecord>& records);

}  // namespace accbs

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gridrestore/analysis.hpp"
#include "gridrestore/heuristics.hpp"
#include "gridrestore/network.hpp"

namespace gridrestore {

enum class Algorithm { util, rrr, rad, rop, oracle };

const char* to_string(Algorithm algorithm);
/// Throws std::invalid_argument for unknown names.
Algorithm parse_algorithm(std::string_view name);

// Process exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParseError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitBadConfig = 4;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path case_path;
  std::optional<double> damage_fraction;
  std::vector<LineId> damage_lines;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::util;
  double time_limit = 60.0;
  double rel_gap = 0.01;
  std::optional<int> n_periods;  // default: one period per damaged line
  std::filesystem::path output_dir = ".";
  bool external = false;
  std::string external_command;  // empty: taken from the environment
  bool parallel = false;         // run RRR halves concurrently
  bool post_process = true;
  RadConfig rad;

  /// Throws ConfigError.
  void validate() const;
  DamageScenario damage(const Network& network) const;
  PeriodSchedule schedule(const DamageScenario& damage) const;
};

struct RunResult {
  RestorationReport report;
  DamageScenario damage;
  PeriodSchedule schedule;
  std::optional<double> gap;  // ordering MILP only
  std::string status = "ok";
};

/// Runs the configured algorithm on a loaded network. Wall time covers the
/// algorithm only. Throws InfeasibleModel or SolverFailure.
RunResult run_algorithm(const Network& network, const RunConfig& config);

/// Cuts an ordering into periods by the cumulative budgets of `schedule`.
RestorationPlan bucket_sequence(std::span<const LineId> order, const PeriodSchedule& schedule);

/// Writes report.csv, summary.json and timing.json into config.output_dir and
/// prints a summary line. Returns a process exit code.
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs every algorithm on the same scenario; writes compare.csv and prints a
/// table. The best energy and all energies within 1% of it are flagged.
int cmd_compare(const RunConfig& config, const std::vector<Algorithm>& algorithms, std::ostream& out,
                std::ostream& err);

struct SweepConfig {
  RunConfig base;
  std::vector<double> fractions;
  std::vector<std::uint64_t> seeds;
  std::vector<Algorithm> algorithms;
  std::size_t workers = 0;  // 0: hardware concurrency
};

struct SweepSummary {
  std::size_t computed = 0;
  std::size_t cached = 0;
  std::size_t failed = 0;
};

/// Full factorial over fractions x seeds x algorithms. Each cell's result is
/// kept in output_dir/cells so an interrupted sweep resumes where it stopped;
/// the long-form table goes to output_dir/sweep.csv.
SweepSummary cmd_sweep(const SweepConfig& config, std::ostream& log);

/// Replaces `path` with `content` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace gridrestore

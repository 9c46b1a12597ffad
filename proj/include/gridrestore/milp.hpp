#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gridrestore/lp.hpp"

namespace gridrestore {

/// A linear program whose listed variables must take values in {0, 1}.
struct MixedIntegerProgram {
  LinearProgram base;
  std::vector<std::size_t> binary_vars;

  /// Throws ModelError when a binary has bounds outside [0, 1].
  void validate() const;
};

struct SolveOptions {
  /// Wall-clock seconds. Zero means the budget is already spent: only the
  /// warm start (if any) is evaluated.
  double time_limit = 60.0;
  double rel_gap = 0.01;
  /// Values for every entry of binary_vars, in the same order.
  std::optional<std::vector<double>> warm_start;
  std::size_t lp_iteration_limit = 1000000;
};

enum class MipStatus { optimal_within_gap, feasible_time_limit, infeasible, failure };

const char* to_string(MipStatus status);

struct MipSolution {
  MipStatus status = MipStatus::failure;
  bool has_incumbent = false;
  double objective = 0.0;
  /// Best proven bound in the program's own sense.
  double best_bound = 0.0;
  double gap = 0.0;
  /// Aligned with binary_vars.
  std::vector<double> binaries;
  /// Full primal assignment of the incumbent.
  std::vector<double> primal;
  double elapsed_seconds = 0.0;

  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  bool warm_start_accepted = false;
  /// (best bound, incumbent) after every processed node, in the program's sense.
  std::vector<std::pair<double, double>> progress;
};

/// |bound - incumbent| / max(|incumbent|, 1e-10).
double relative_gap(double bound, double incumbent);

/// Best-bound branch-and-bound over solve_lp.
///
/// Branches on the most fractional binary (ties to the lowest variable
/// index). Integral node solutions are polished by re-solving the LP with the
/// binaries fixed. Time is checked between node solves and between pivots of
/// a node LP; an interrupted node keeps its parent's bound.
MipSolution solve_mip(const MixedIntegerProgram& mip, const SolveOptions& options);

/// Fixes every binary to the given values and solves the remaining LP.
LpSolution solve_with_fixed_binaries(const MixedIntegerProgram& mip, const std::vector<double>& binaries,
                                     const LpOptions& options = {});

/// Runs an external solver through MPS files.
///
/// `command_template` is handed to /bin/sh after substituting {mps},
/// {timelimit}, {gap} and {solfile}. The solver writes a text solution file:
///
///     # comment lines are ignored
///     status optimal|feasible|infeasible|failure   (optional, default optimal)
///     objective <value>                             (required unless infeasible)
///     bound <value>                                 (optional)
///     <column> <value>                              (one per MPS column)
///
/// Column names are the MPS names (mps_column_name) and the objective is in
/// the MPS file's minimization sense. Spawn errors, nonzero exit codes,
/// timeouts, unreadable files, and assignments that violate the model all
/// map to MipStatus::failure.
struct ExternalBackendConfig {
  std::string command_template;
  /// The child is killed after time_limit + grace_seconds.
  double grace_seconds = 10.0;
  /// Keep the temporary directory (for debugging).
  bool keep_files = false;
};

/// Environment variable that overrides ExternalBackendConfig::command_template.
inline constexpr const char* kExternalCommandEnv = "GRIDRESTORE_EXTERNAL_COMMAND";

ExternalBackendConfig external_backend_from_env(ExternalBackendConfig fallback = {});

MipSolution solve_external(const MixedIntegerProgram& mip, const SolveOptions& options,
                           const ExternalBackendConfig& backend);

/// Parses the solution-file format above into a MipSolution for `mip`.
/// Throws std::runtime_error on malformed content.
MipSolution parse_external_solution(const MixedIntegerProgram& mip, const std::string& text);

}  // namespace gridrestore

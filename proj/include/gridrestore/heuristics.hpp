#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gridrestore/milp.hpp"
#include "gridrestore/models.hpp"
#include "gridrestore/network.hpp"

namespace gridrestore {

using MipBackend = std::function<MipSolution(const MixedIntegerProgram&, const SolveOptions&)>;

/// Branch-and-bound in this library.
MipBackend internal_backend();
/// Runs `config.command_template` per solve; see solve_external.
MipBackend external_backend(ExternalBackendConfig config);

struct AlgoBudget {
  double time_limit = 60.0;  // seconds, > 0
  double rel_gap = 0.01;
  std::uint64_t seed = 0;
};

/// Lines sorted by thermal limit, largest first; ties by (from bus, to bus, id).
std::vector<LineId> util_sequence(const Network& network, std::span<const LineId> lines);

/// One damaged line per period in utilization order.
RestorationPlan util_order(const Network& network, const DamageScenario& damage);

struct RrrOptions {
  MipBackend backend;  // empty means internal_backend()
  bool parallel = false;
  /// Overrides the half-of-remaining-time rule for every sub-solve.
  std::optional<double> sub_time_limit;
};

struct RrrStats {
  std::size_t sub_solves = 0;
  std::size_t max_binaries = 0;
  std::size_t failures = 0;         // sub-solves without a usable plan
  std::size_t empty_first = 0;      // splits that restored nothing in period 1
  std::optional<double> top_split_objective;
  std::optional<RestorationPlan> top_split;  // two-period plan of the root call
};

/// Recursive bisection of the damage set through two-period ordering problems.
/// Always returns a fully ordered plan (one line per period).
RestorationPlan rrr(const Network& network, const DamageScenario& damage, const AlgoBudget& budget,
                    const RrrOptions& options = {}, RrrStats* stats = nullptr);

struct RadConfig {
  int min_partition = 2;
  int max_partition = 5;
  double initial_time_fraction = 0.01;  // of the total budget, per block solve
  int stall_limit = 100;                // iterations without an accepted block
  double growth_factor = 1.10;
  double adapt_threshold = 0.80;

  void validate() const;
};

struct RadStats {
  std::size_t iterations = 0;
  std::size_t block_solves = 0;
  std::size_t accepted_blocks = 0;
  std::size_t time_doublings = 0;
  std::size_t partition_growths = 0;
  double final_sub_time_limit = 0.0;
  int final_max_partition = 0;
  /// Post-processed energy of the incumbent: the initial value, then one entry per accepted block.
  std::vector<double> energy_trace;
};

/// Re-optimizes random contiguous blocks of the current ordering. Returns a
/// fully ordered plan whose post-processed energy is at least that of `initial`.
RestorationPlan rad(const Network& network, const DamageScenario& damage, const AlgoBudget& budget,
                    const RadConfig& config, const RestorationPlan& initial, const MipBackend& backend = {},
                    RadStats* stats = nullptr);

inline constexpr std::size_t kBruteForceMaxLines = 7;

/// Best plan over every ordering of the damaged lines, with the ordering cut
/// into periods by the cumulative budgets of `schedule`. Plans are scored by
/// post-processed energy; ties go to the lexicographically smallest plan.
std::pair<RestorationPlan, double> brute_force_optimal(const Network& network, const DamageScenario& damage,
                                                       const PeriodSchedule& schedule);

/// Post-processed total energy of a plan.
double post_processed_energy(DeliveryEvaluator& evaluator, const DamageScenario& damage,
                             const RestorationPlan& plan, const PeriodSchedule& schedule);

}  // namespace gridrestore

#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "gridrestore/lp.hpp"
#include "gridrestore/milp.hpp"
#include "gridrestore/network.hpp"

namespace gridrestore {

inline constexpr std::size_t kNoVariable = static_cast<std::size_t>(-1);

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multi-period DC power flow for a fixed plan (Restoration Implementation Problem).
///
/// Per period k the variables are, in order: generator output, flow on each
/// energized line, delivered load fraction, and bus angle. Flow on line
/// (f, t) is measured from f to t and satisfies P = -b (theta_f - theta_t).
/// The lowest-index bus of every energized island has its angle fixed to 0.
struct RipModel {
  LinearProgram program;
  std::vector<std::vector<std::size_t>> gen_vars;   // [k][generator]
  std::vector<std::vector<std::size_t>> flow_vars;  // [k][line], kNoVariable when de-energized
  std::vector<std::vector<std::size_t>> load_vars;  // [k][load]
  std::vector<std::vector<std::size_t>> angle_vars;  // [k][bus]
};

RipModel build_rip(const Network& network, const DamageScenario& damage, const RestorationPlan& plan,
                   const PeriodSchedule& schedule);

/// Restoration Ordering Problem: joint choice of repair order and dispatch.
///
/// `damaged` lists the line positions that receive status binaries; lines in
/// `out_of_service` are omitted from the model entirely. Every other line is
/// in service in all periods.
struct RopArtifacts {
  MixedIntegerProgram program;
  PeriodSchedule schedule;
  std::vector<std::size_t> damaged;                  // line positions, ascending id
  std::vector<std::vector<std::size_t>> gen_vars;    // [k][generator]
  std::vector<std::vector<std::size_t>> flow_vars;   // [k][line], kNoVariable when omitted
  std::vector<std::vector<std::size_t>> load_vars;   // [k][load]
  std::vector<std::vector<std::size_t>> angle_vars;  // [k][bus]
  std::vector<std::vector<std::size_t>> status_vars;   // [k][damaged slot] -> variable index
  std::vector<std::vector<std::size_t>> status_slots;  // [k][damaged slot] -> index in binary_vars
  /// Sum of angle-difference limits over all network lines.
  double theta_delta = 0.0;
  /// |b| * theta_delta per damaged slot.
  std::vector<double> big_m;

  std::size_t n_binaries() const { return program.binary_vars.size(); }
};

/// `damage` holds the lines to order; schedule.repair_budget.back() must equal
/// its size.
RopArtifacts build_rop(const Network& network, const DamageScenario& damage, const PeriodSchedule& schedule,
                       std::span<const LineId> out_of_service = {});

/// Binary values (aligned with binary_vars) that realize `plan`.
std::vector<double> plan_assignment(const RopArtifacts& rop, const Network& network, const RestorationPlan& plan);

/// Fixes the status binaries to `plan`.
void fix_plan(RopArtifacts& rop, const Network& network, const RestorationPlan& plan);

/// Lines whose status switches from 0 to 1 in period k (binaries rounded at 0.5).
/// Throws PlanError when the assignment is not monotone within 1e-6.
RestorationPlan extract_plan(const RopArtifacts& rop, const Network& network, const MipSolution& solution);

struct PowerServedSeries {
  std::vector<double> delivered;  // sum_d x_dk P_d, per-unit power
  std::vector<double> durations;  // hours
  std::vector<std::vector<double>> load_fractions;  // [k][load]

  std::size_t size() const { return delivered.size(); }
};

struct PeriodDelivery {
  double delivered = 0.0;
  std::vector<double> load_fractions;
};

/// Single-period maximum load served for a given set of energized lines,
/// memoized by the set. Thread-safe.
class DeliveryEvaluator {
 public:
  explicit DeliveryEvaluator(const Network& network) : network_(network) {}

  /// `energized[l]` marks line position l as in service.
  PeriodDelivery period(const std::vector<char>& energized);

  /// Per-period delivery of a plan; the periods of the RIP are independent,
  /// so its LP is solved one period block at a time.
  PowerServedSeries evaluate(const DamageScenario& damage, const RestorationPlan& plan,
                             const PeriodSchedule& schedule);

  std::size_t lp_solves() const;

 private:
  const Network& network_;
  mutable std::mutex mutex_;
  std::map<std::vector<char>, PeriodDelivery> cache_;
  std::size_t solves_ = 0;
};

/// Solves the RIP for the plan and returns the per-period delivery.
PowerServedSeries evaluate_plan(const Network& network, const DamageScenario& damage, const RestorationPlan& plan,
                                const PeriodSchedule& schedule);

/// Energized-line masks per period (undamaged lines plus restorations so far).
std::vector<std::vector<char>> energized_masks(const Network& network, const DamageScenario& damage,
                                               const RestorationPlan& plan);

}  // namespace gridrestore

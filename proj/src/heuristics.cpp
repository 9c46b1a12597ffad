#include "gridrestore/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <mutex>
#include <random>
#include <stdexcept>
#include <tuple>

#include "gridrestore/analysis.hpp"

namespace gridrestore {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_until(Clock::time_point t) { return std::chrono::duration<double>(t - Clock::now()).count(); }

Clock::time_point after(Clock::time_point t, double seconds) {
  return t + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

DamageScenario subset(std::vector<LineId> lines) {
  std::sort(lines.begin(), lines.end());
  DamageScenario d;
  d.damaged_lines = std::move(lines);
  return d;
}

bool usable(const MipSolution& sol) {
  return sol.has_incumbent &&
         (sol.status == MipStatus::optimal_within_gap || sol.status == MipStatus::feasible_time_limit);
}

// Uniform integer in [lo, hi] by rejection, independent of <random> distributions.
int draw_between(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return lo + static_cast<int>(x % span);
}

}  // namespace

MipBackend internal_backend() {
  return [](const MixedIntegerProgram& mip, const SolveOptions& options) { return solve_mip(mip, options); };
}

MipBackend external_backend(ExternalBackendConfig config) {
  return [config = std::move(config)](const MixedIntegerProgram& mip, const SolveOptions& options) {
    return solve_external(mip, options, config);
  };
}

std::vector<LineId> util_sequence(const Network& network, std::span<const LineId> lines) {
  std::vector<LineId> order(lines.begin(), lines.end());
  auto key = [&](LineId id) {
    const Line& l = network.lines()[network.line_index(id)];
    return std::make_tuple(-l.thermal_limit, to_int(l.from_bus), to_int(l.to_bus), to_int(l.id));
  };
  std::sort(order.begin(), order.end(), [&](LineId a, LineId b) { return key(a) < key(b); });
  return order;
}

RestorationPlan util_order(const Network& network, const DamageScenario& damage) {
  const auto order = util_sequence(network, damage.damaged_lines);
  return plan_from_sequence(order);
}

double post_processed_energy(DeliveryEvaluator& evaluator, const DamageScenario& damage,
                             const RestorationPlan& plan, const PeriodSchedule& schedule) {
  const PowerServedSeries raw = evaluator.evaluate(damage, plan, schedule);
  return total_energy(monotonize(raw, plan).first);
}

// ---------------------------------------------------------------------------
// RRR

namespace {

class RrrRunner {
 public:
  RrrRunner(const Network& network, const AlgoBudget& budget, const RrrOptions& options)
      : network_(network), budget_(budget), options_(options),
        backend_(options.backend ? options.backend : internal_backend()) {}

  std::vector<LineId> run(const std::vector<LineId>& lines, const std::vector<LineId>& removed,
                          Clock::time_point deadline, bool root) {
    if (lines.size() <= 1) return lines;
    const std::vector<LineId> util = util_sequence(network_, lines);
    const std::size_t mid = (lines.size() + 1) / 2;

    std::vector<LineId> first(util.begin(), util.begin() + static_cast<std::ptrdiff_t>(mid));
    std::vector<LineId> second(util.begin() + static_cast<std::ptrdiff_t>(mid), util.end());
    const double sub_limit = options_.sub_time_limit ? *options_.sub_time_limit : seconds_until(deadline) / 2.0;
    std::optional<RestorationPlan> split;
    if (sub_limit > 0.0 || options_.sub_time_limit) split = solve_split(lines, removed, sub_limit, root);

    if (split) {
      if (split->periods[0].empty()) {
        note([](RrrStats& s) { ++s.empty_first; });
        return util;
      }
      first = split->periods[0];
      second = split->periods[1];
    }

    std::vector<LineId> first_removed = removed;
    first_removed.insert(first_removed.end(), second.begin(), second.end());
    std::vector<LineId> head, tail;
    if (options_.parallel) {
      auto pending = std::async(std::launch::async, [&] { return run(first, first_removed, deadline, false); });
      tail = run(second, removed, deadline, false);
      head = pending.get();
    } else {
      head = run(first, first_removed, after(Clock::now(), std::max(0.0, seconds_until(deadline)) / 2.0), false);
      tail = run(second, removed, deadline, false);
    }
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }

  RrrStats stats() {
    std::lock_guard lock(mutex_);
    return stats_;
  }

 private:
  template <class F>
  void note(F&& update) {
    std::lock_guard lock(mutex_);
    update(stats_);
  }

  std::optional<RestorationPlan> solve_split(const std::vector<LineId>& lines, const std::vector<LineId>& removed,
                                             double sub_limit, bool root) {
    const DamageScenario damage = subset(lines);
    const PeriodSchedule schedule = build_schedule(static_cast<int>(lines.size()), 2);
    const RopArtifacts rop = build_rop(network_, damage, schedule, removed);
    SolveOptions opts;
    opts.time_limit = std::max(0.0, sub_limit);
    opts.rel_gap = budget_.rel_gap;
    const MipSolution sol = backend_(rop.program, opts);
    std::optional<RestorationPlan> plan;
    if (usable(sol)) {
      try {
        plan = extract_plan(rop, network_, sol);
      } catch (const PlanError&) {
        plan.reset();
      }
    }
    note([&](RrrStats& s) {
      ++s.sub_solves;
      s.max_binaries = std::max(s.max_binaries, rop.n_binaries());
      if (!plan) ++s.failures;
      if (root && plan) {
        s.top_split_objective = sol.objective;
        s.top_split = plan;
      }
    });
    return plan;
  }

  const Network& network_;
  AlgoBudget budget_;
  RrrOptions options_;
  MipBackend backend_;
  std::mutex mutex_;
  RrrStats stats_;
};

}  // namespace

RestorationPlan rrr(const Network& network, const DamageScenario& damage, const AlgoBudget& budget,
                    const RrrOptions& options, RrrStats* stats) {
  if (!(budget.time_limit > 0.0)) throw std::invalid_argument("time_limit must be positive");
  RrrRunner runner(network, budget, options);
  const auto deadline = after(Clock::now(), budget.time_limit);
  const std::vector<LineId> order = runner.run(damage.damaged_lines, {}, deadline, true);
  if (stats) *stats = runner.stats();
  RestorationPlan plan = plan_from_sequence(order);
  validate_plan(plan, damage);
  return plan;
}

// ---------------------------------------------------------------------------
// RAD

void RadConfig::validate() const {
  if (min_partition < 2 || max_partition < min_partition)
    throw std::invalid_argument("partition sizes must satisfy 2 <= min <= max");
  if (!(initial_time_fraction > 0.0 && initial_time_fraction <= 1.0))
    throw std::invalid_argument("initial_time_fraction must lie in (0, 1]");
  if (!(adapt_threshold > 0.0 && adapt_threshold <= 1.0))
    throw std::invalid_argument("adapt_threshold must lie in (0, 1]");
  if (!(growth_factor >= 1.0)) throw std::invalid_argument("growth_factor must be at least 1");
  if (stall_limit < 0) throw std::invalid_argument("stall_limit must be nonnegative");
}

RestorationPlan rad(const Network& network, const DamageScenario& damage, const AlgoBudget& budget,
                    const RadConfig& config, const RestorationPlan& initial, const MipBackend& backend,
                    RadStats* stats) {
  config.validate();
  if (!(budget.time_limit > 0.0)) throw std::invalid_argument("time_limit must be positive");
  validate_plan(initial, damage);
  const auto start = Clock::now();
  const auto deadline = after(start, budget.time_limit);
  const MipBackend solve = backend ? backend : internal_backend();

  std::vector<LineId> seq = initial.sequence();
  const std::size_t n = seq.size();
  const PeriodSchedule schedule = build_schedule(static_cast<int>(n), static_cast<int>(n));
  DeliveryEvaluator evaluator(network);

  RadStats local;
  RadStats& st = stats ? *stats : local;
  st = RadStats{};
  double sub_limit = config.initial_time_fraction * budget.time_limit;
  int max_partition = config.max_partition;
  double energy = n > 0 ? post_processed_energy(evaluator, damage, plan_from_sequence(seq), schedule) : 0.0;
  st.energy_trace.push_back(energy);

  std::mt19937_64 rng(budget.seed);
  int stall = 0;
  while (n >= 2 && stall < config.stall_limit && Clock::now() < deadline) {
    ++st.iterations;
    std::size_t attempted = 0, not_improved = 0, timed_out = 0;
    bool accepted_any = false;
    for (std::size_t pos = 0; pos < n;) {
      const auto size = std::min<std::size_t>(
          static_cast<std::size_t>(draw_between(rng, config.min_partition, max_partition)), n - pos);
      const std::size_t begin = pos;
      pos += size;
      if (size < 2) continue;
      const double remaining = seconds_until(deadline);
      if (remaining <= 0.0) break;
      ++attempted;

      const std::vector<LineId> block(seq.begin() + static_cast<std::ptrdiff_t>(begin),
                                      seq.begin() + static_cast<std::ptrdiff_t>(begin + size));
      const std::vector<LineId> later(seq.begin() + static_cast<std::ptrdiff_t>(begin + size), seq.end());
      const RopArtifacts rop = build_rop(network, subset(block), build_schedule(int(size), int(size)), later);
      const std::vector<double> warm = plan_assignment(rop, network, plan_from_sequence(block));
      const LpSolution current = solve_with_fixed_binaries(rop.program, warm);
      if (current.status != LpStatus::optimal) throw std::runtime_error("current block ordering is infeasible");

      SolveOptions opts;
      opts.time_limit = std::min(sub_limit, remaining);
      opts.rel_gap = budget.rel_gap;
      opts.warm_start = warm;
      const MipSolution sol = solve(rop.program, opts);
      ++st.block_solves;
      if (sol.status != MipStatus::optimal_within_gap && sol.status != MipStatus::infeasible) ++timed_out;

      bool improved = false;
      const double threshold = current.objective_value + 1e-9 * std::max(1.0, std::abs(current.objective_value));
      if (usable(sol) && sol.objective > threshold) {
        std::optional<RestorationPlan> block_plan;
        try {
          block_plan = extract_plan(rop, network, sol);
        } catch (const PlanError&) {
        }
        if (block_plan) {
          // Multi-line periods become consecutive single-line periods, so
          // the candidate ordering is scored again as it will be applied.
          const std::vector<LineId> reordered = block_plan->sequence();
          const LpSolution candidate =
              solve_with_fixed_binaries(rop.program, plan_assignment(rop, network, plan_from_sequence(reordered)));
          if (candidate.status == LpStatus::optimal && candidate.objective_value > threshold) {
            std::vector<LineId> trial = seq;
            std::copy(reordered.begin(), reordered.end(), trial.begin() + static_cast<std::ptrdiff_t>(begin));
            const double trial_energy =
                post_processed_energy(evaluator, damage, plan_from_sequence(trial), schedule);
            if (trial_energy >= energy) {
              seq = std::move(trial);
              energy = trial_energy;
              st.energy_trace.push_back(energy);
              ++st.accepted_blocks;
              accepted_any = true;
              improved = true;
            }
          }
        }
      }
      if (!improved) ++not_improved;
    }

    const double threshold = config.adapt_threshold * static_cast<double>(attempted);
    if (attempted > 0 && static_cast<double>(not_improved) >= threshold) {
      if (static_cast<double>(timed_out) >= threshold) {
        sub_limit *= 2.0;
        ++st.time_doublings;
      } else {
        const int grown = std::min(static_cast<int>(std::ceil(config.growth_factor * max_partition - 1e-9)),
                                   static_cast<int>(n / 2));
        if (grown > max_partition) {
          max_partition = grown;
          ++st.partition_growths;
        }
      }
    }
    stall = accepted_any ? 0 : stall + 1;
  }
  st.final_sub_time_limit = sub_limit;
  st.final_max_partition = max_partition;
  return plan_from_sequence(seq);
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

std::pair<RestorationPlan, double> brute_force_optimal(const Network& network, const DamageScenario& damage,
                                                       const PeriodSchedule& schedule) {
  if (damage.size() > kBruteForceMaxLines)
    throw std::invalid_argument("exhaustive search is limited to " + std::to_string(kBruteForceMaxLines) +
                                " damaged lines");
  if (schedule.repair_budget.empty() || schedule.repair_budget.back() != static_cast<int>(damage.size()))
    throw std::invalid_argument("final repair budget must equal the number of damaged lines");

  DeliveryEvaluator evaluator(network);
  std::vector<LineId> perm = damage.damaged_lines;
  std::sort(perm.begin(), perm.end());
  std::optional<RestorationPlan> best;
  double best_energy = -kInf;
  do {
    RestorationPlan plan;
    int prev = 0;
    for (int cumulative : schedule.repair_budget) {
      std::vector<LineId> period(perm.begin() + prev, perm.begin() + cumulative);
      std::sort(period.begin(), period.end());
      plan.periods.push_back(std::move(period));
      prev = cumulative;
    }
    const double e = post_processed_energy(evaluator, damage, plan, schedule);
    const double tol = 1e-9 * std::max(1.0, std::abs(best_energy));
    if (!best || e > best_energy + tol || (e >= best_energy - tol && plan < *best)) {
      if (!best || e > best_energy + tol) best_energy = e;
      else best_energy = std::max(best_energy, e);
      best = std::move(plan);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {std::move(*best), best_energy};
}

}  // namespace gridrestore

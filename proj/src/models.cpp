#include "gridrestore/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gridrestore/union_find.hpp"

namespace gridrestore {

namespace {

std::string tag(const char* prefix, int id, int k) {
  return std::string(prefix) + "_" + std::to_string(id) + "_" + std::to_string(k);
}

void check_schedule(const PeriodSchedule& schedule) {
  if (schedule.n_periods < 1) throw std::invalid_argument("schedule needs at least one period");
  const auto n = static_cast<std::size_t>(schedule.n_periods);
  if (schedule.delta.size() != n || schedule.repair_budget.size() != n)
    throw std::invalid_argument("schedule vectors disagree with n_periods");
  for (double d : schedule.delta)
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("period durations must be positive");
  for (std::size_t k = 1; k < n; ++k)
    if (schedule.repair_budget[k] < schedule.repair_budget[k - 1])
      throw std::invalid_argument("repair budget must be nondecreasing");
}

// Lowest-position bus of each connected component over the present lines.
std::vector<char> reference_buses(const Network& network, const std::vector<char>& present) {
  UnionFind uf(network.buses().size());
  for (std::size_t l = 0; l < present.size(); ++l)
    if (present[l]) uf.unite(network.from_index(l), network.to_index(l));
  std::vector<char> is_ref(network.buses().size(), 0);
  std::vector<char> root_seen(network.buses().size(), 0);
  for (std::size_t i = 0; i < network.buses().size(); ++i) {
    const std::size_t root = uf.find(i);
    if (!root_seen[root]) {
      root_seen[root] = 1;
      is_ref[i] = 1;
    }
  }
  return is_ref;
}

struct PeriodBlock {
  std::vector<std::size_t> gen, flow, load, angle;
};

// Dispatch variables and constraints for one period.
//
// `present[l]` puts line l in the model; `status[l]` names its status binary
// or kNoVariable for a line that is always in service. `big_m[l]` is used only
// for switched lines.
PeriodBlock append_period(LinearProgram& lp, const Network& network, int k, double delta,
                          const std::vector<char>& present, const std::vector<std::size_t>& status,
                          const std::vector<double>& big_m, const std::vector<char>& is_ref,
                          std::vector<Term>& objective) {
  const auto& lines = network.lines();
  PeriodBlock block;
  block.gen.reserve(network.generators().size());
  for (const Generator& g : network.generators())
    block.gen.push_back(lp.add_variable(tag("pg", g.id, k), 0.0, g.p_max));

  block.flow.assign(lines.size(), kNoVariable);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (!present[l]) continue;
    const Line& line = lines[l];
    double cap = line.thermal_limit;
    if (status[l] != kNoVariable && !std::isfinite(cap)) cap = big_m[l];
    block.flow[l] = lp.add_variable(tag("pl", to_int(line.id), k), -cap, cap);
  }

  block.load.reserve(network.loads().size());
  for (const Load& d : network.loads()) {
    block.load.push_back(lp.add_variable(tag("xd", d.id, k), 0.0, 1.0));
    objective.push_back({block.load.back(), delta * d.p_demand});
  }

  block.angle.reserve(network.buses().size());
  for (std::size_t i = 0; i < network.buses().size(); ++i) {
    const double bound = is_ref[i] ? 0.0 : kInf;
    block.angle.push_back(lp.add_variable(tag("va", to_int(network.buses()[i].id), k), -bound, bound));
  }

  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (!present[l]) continue;
    const Line& line = lines[l];
    const std::size_t f = block.angle[network.from_index(l)];
    const std::size_t t = block.angle[network.to_index(l)];
    const double b = line.susceptance_b;
    const int id = to_int(line.id);
    // P + b (theta_f - theta_t) = 0
    std::vector<Term> flow{{block.flow[l], 1.0}, {f, b}, {t, -b}};
    if (status[l] == kNoVariable) {
      lp.add_constraint(tag("dcflow", id, k), std::move(flow), Relation::equal, 0.0);
      continue;
    }
    const std::size_t z = status[l];
    const double m = big_m[l];
    auto upper = flow;
    upper.push_back({z, m});
    lp.add_constraint(tag("dcflow_up", id, k), std::move(upper), Relation::less_equal, m);
    flow.push_back({z, -m});
    lp.add_constraint(tag("dcflow_lo", id, k), std::move(flow), Relation::greater_equal, -m);
    const double cap = std::isfinite(line.thermal_limit) ? line.thermal_limit : m;
    lp.add_constraint(tag("onoff_up", id, k), {{block.flow[l], 1.0}, {z, -cap}}, Relation::less_equal, 0.0);
    lp.add_constraint(tag("onoff_lo", id, k), {{block.flow[l], 1.0}, {z, cap}}, Relation::greater_equal, 0.0);
  }

  // generation - outflow + inflow - load = 0
  for (std::size_t i = 0; i < network.buses().size(); ++i) {
    std::vector<Term> terms;
    for (std::size_t g : network.generators_at(i)) terms.push_back({block.gen[g], 1.0});
    for (std::size_t l : network.lines_at(i)) {
      if (!present[l]) continue;
      terms.push_back({block.flow[l], network.from_index(l) == i ? -1.0 : 1.0});
    }
    for (std::size_t d : network.loads_at(i)) terms.push_back({block.load[d], -network.loads()[d].p_demand});
    lp.add_constraint(tag("balance", to_int(network.buses()[i].id), k), std::move(terms), Relation::equal, 0.0);
  }
  return block;
}

std::vector<char> damage_mask(const Network& network, const DamageScenario& damage) {
  std::vector<char> damaged(network.lines().size(), 0);
  for (LineId id : damage.damaged_lines) {
    if (!network.has_line(id)) throw std::invalid_argument("damage names unknown line " + std::to_string(to_int(id)));
    damaged[network.line_index(id)] = 1;
  }
  return damaged;
}

}  // namespace

std::vector<std::vector<char>> energized_masks(const Network& network, const DamageScenario& damage,
                                               const RestorationPlan& plan) {
  std::vector<char> energized = damage_mask(network, damage);
  for (char& e : energized) e = static_cast<char>(!e);
  std::vector<std::vector<char>> masks;
  masks.reserve(plan.n_periods());
  for (const auto& period : plan.periods) {
    for (LineId id : period) energized[network.line_index(id)] = 1;
    masks.push_back(energized);
  }
  return masks;
}

RipModel build_rip(const Network& network, const DamageScenario& damage, const RestorationPlan& plan,
                   const PeriodSchedule& schedule) {
  validate_plan(plan, damage);
  check_schedule(schedule);
  if (plan.n_periods() != static_cast<std::size_t>(schedule.n_periods))
    throw std::invalid_argument("plan and schedule have different lengths");

  RipModel model;
  const std::vector<std::size_t> no_status(network.lines().size(), kNoVariable);
  const std::vector<double> no_m(network.lines().size(), 0.0);
  std::vector<Term> objective;
  const auto masks = energized_masks(network, damage, plan);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    PeriodBlock block = append_period(model.program, network, static_cast<int>(k + 1), schedule.delta[k], masks[k],
                                      no_status, no_m, reference_buses(network, masks[k]), objective);
    model.gen_vars.push_back(std::move(block.gen));
    model.flow_vars.push_back(std::move(block.flow));
    model.load_vars.push_back(std::move(block.load));
    model.angle_vars.push_back(std::move(block.angle));
  }
  model.program.set_objective(Sense::maximize, std::move(objective));
  return model;
}

RopArtifacts build_rop(const Network& network, const DamageScenario& damage, const PeriodSchedule& schedule,
                       std::span<const LineId> out_of_service) {
  check_schedule(schedule);
  if (schedule.repair_budget.back() != static_cast<int>(damage.size()))
    throw std::invalid_argument("final repair budget must equal the number of damaged lines");

  const auto& lines = network.lines();
  const std::vector<char> damaged_mask = damage_mask(network, damage);
  std::vector<char> present(lines.size(), 1);
  for (LineId id : out_of_service) {
    if (!network.has_line(id)) throw std::invalid_argument("unknown out-of-service line");
    const std::size_t l = network.line_index(id);
    if (damaged_mask[l]) throw std::invalid_argument("line is both ordered and out of service");
    present[l] = 0;
  }

  RopArtifacts rop;
  rop.schedule = schedule;
  for (LineId id : damage.damaged_lines) rop.damaged.push_back(network.line_index(id));
  for (const Line& line : lines) rop.theta_delta += line.angle_diff_max;

  std::vector<double> big_m(lines.size(), 0.0);
  for (std::size_t s = 0; s < rop.damaged.size(); ++s) {
    const std::size_t l = rop.damaged[s];
    big_m[l] = std::abs(lines[l].susceptance_b) * rop.theta_delta;
    if (!(big_m[l] > 0.0) || !std::isfinite(big_m[l])) throw std::invalid_argument("non-positive Big-M");
    rop.big_m.push_back(big_m[l]);
  }

  LinearProgram& lp = rop.program.base;
  const std::vector<char> is_ref = reference_buses(network, present);
  std::vector<Term> objective;
  const auto n = static_cast<std::size_t>(schedule.n_periods);
  for (std::size_t k = 0; k < n; ++k) {
    const int period = static_cast<int>(k + 1);
    std::vector<std::size_t> status(lines.size(), kNoVariable);
    std::vector<std::size_t> vars, slots;
    for (std::size_t l : rop.damaged) {
      // Every line is repaired by the final period.
      const double lower = k + 1 == n ? 1.0 : 0.0;
      status[l] = lp.add_variable(tag("z", to_int(lines[l].id), period), lower, 1.0);
      slots.push_back(rop.program.binary_vars.size());
      rop.program.binary_vars.push_back(status[l]);
      vars.push_back(status[l]);
    }
    PeriodBlock block =
        append_period(lp, network, period, schedule.delta[k], present, status, big_m, is_ref, objective);
    rop.gen_vars.push_back(std::move(block.gen));
    rop.flow_vars.push_back(std::move(block.flow));
    rop.load_vars.push_back(std::move(block.load));
    rop.angle_vars.push_back(std::move(block.angle));
    rop.status_vars.push_back(std::move(vars));
    rop.status_slots.push_back(std::move(slots));
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Term> budget;
    for (std::size_t z : rop.status_vars[k]) budget.push_back({z, 1.0});
    if (!budget.empty())
      lp.add_constraint("budget_" + std::to_string(k + 1), std::move(budget), Relation::less_equal,
                        schedule.repair_budget[k]);
  }
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t s = 0; s < rop.damaged.size(); ++s)
      lp.add_constraint(tag("stay", to_int(lines[rop.damaged[s]].id), static_cast<int>(k + 1)),
                        {{rop.status_vars[k][s], 1.0}, {rop.status_vars[k + 1][s], -1.0}}, Relation::less_equal,
                        0.0);
  lp.set_objective(Sense::maximize, std::move(objective));
  return rop;
}

std::vector<double> plan_assignment(const RopArtifacts& rop, const Network& network, const RestorationPlan& plan) {
  const std::size_t n = rop.status_vars.size();
  if (plan.n_periods() != n) throw std::invalid_argument("plan length differs from the model's periods");
  std::vector<std::size_t> restored_at(network.lines().size(), n);
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k)
    for (LineId id : plan.periods[k]) {
      if (!network.has_line(id)) throw std::invalid_argument("plan names unknown line");
      restored_at[network.line_index(id)] = k;
      ++count;
    }
  if (count != rop.damaged.size()) throw std::invalid_argument("plan does not cover the modelled damage");
  std::vector<double> values(rop.n_binaries(), 0.0);
  for (std::size_t s = 0; s < rop.damaged.size(); ++s) {
    const std::size_t at = restored_at[rop.damaged[s]];
    if (at == n) throw std::invalid_argument("plan does not cover the modelled damage");
    for (std::size_t k = at; k < n; ++k) values[rop.status_slots[k][s]] = 1.0;
  }
  return values;
}

void fix_plan(RopArtifacts& rop, const Network& network, const RestorationPlan& plan) {
  const std::vector<double> values = plan_assignment(rop, network, plan);
  for (std::size_t b = 0; b < values.size(); ++b)
    rop.program.base.set_bounds(rop.program.binary_vars[b], values[b], values[b]);
}

RestorationPlan extract_plan(const RopArtifacts& rop, const Network& network, const MipSolution& solution) {
  if (!solution.has_incumbent) throw PlanError("solution has no incumbent");
  if (solution.binaries.size() != rop.n_binaries()) throw PlanError("solution does not match the model");
  const std::size_t n = rop.status_vars.size();
  RestorationPlan plan;
  plan.periods.resize(n);
  for (std::size_t s = 0; s < rop.damaged.size(); ++s) {
    double previous_raw = 0.0;
    bool previous = false;
    for (std::size_t k = 0; k < n; ++k) {
      const double raw = solution.binaries[rop.status_slots[k][s]];
      if (previous_raw - raw > 1e-6) throw PlanError("status of a restored line drops back to zero");
      const bool on = raw >= 0.5;
      if (on && !previous) plan.periods[k].push_back(network.lines()[rop.damaged[s]].id);
      previous = on;
      previous_raw = raw;
    }
    if (!previous) throw PlanError("line never restored");
  }
  for (auto& period : plan.periods) std::sort(period.begin(), period.end());
  return plan;
}

PeriodDelivery DeliveryEvaluator::period(const std::vector<char>& energized) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(energized); it != cache_.end()) return it->second;
  }
  if (energized.size() != network_.lines().size()) throw std::invalid_argument("mask size differs from line count");

  LinearProgram lp;
  std::vector<Term> objective;
  const std::vector<std::size_t> no_status(energized.size(), kNoVariable);
  const std::vector<double> no_m(energized.size(), 0.0);
  const PeriodBlock block = append_period(lp, network_, 1, 1.0, energized, no_status, no_m,
                                          reference_buses(network_, energized), objective);
  lp.set_objective(Sense::maximize, std::move(objective));
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal)
    throw std::runtime_error(std::string("dispatch LP ended with status ") + to_string(sol.status));

  PeriodDelivery result;
  for (std::size_t d = 0; d < block.load.size(); ++d) {
    const double x = std::clamp(sol.primal[block.load[d]], 0.0, 1.0);
    result.load_fractions.push_back(x);
    result.delivered += x * network_.loads()[d].p_demand;
  }
  std::lock_guard lock(mutex_);
  ++solves_;
  cache_.emplace(energized, result);
  return result;
}

std::size_t DeliveryEvaluator::lp_solves() const {
  std::lock_guard lock(mutex_);
  return solves_;
}

PowerServedSeries DeliveryEvaluator::evaluate(const DamageScenario& damage, const RestorationPlan& plan,
                                              const PeriodSchedule& schedule) {
  validate_plan(plan, damage);
  check_schedule(schedule);
  if (plan.n_periods() != static_cast<std::size_t>(schedule.n_periods))
    throw std::invalid_argument("plan and schedule have different lengths");
  PowerServedSeries series;
  for (const auto& mask : energized_masks(network_, damage, plan)) {
    PeriodDelivery p = period(mask);
    series.delivered.push_back(p.delivered);
    series.load_fractions.push_back(std::move(p.load_fractions));
  }
  series.durations = schedule.delta;
  return series;
}

PowerServedSeries evaluate_plan(const Network& network, const DamageScenario& damage, const RestorationPlan& plan,
                                const PeriodSchedule& schedule) {
  DeliveryEvaluator evaluator(network);
  return evaluator.evaluate(damage, plan, schedule);
}

}  // namespace gridrestore

#include "gridrestore/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace gridrestore {

void MixedIntegerProgram::validate() const {
  base.validate();
  for (std::size_t var : binary_vars) {
    if (var >= base.num_variables()) throw ModelError("binary index out of range");
    const auto& v = base.variables()[var];
    if (v.lower < 0.0 || v.upper > 1.0) throw ModelError("binary " + v.name + " has bounds outside [0,1]");
  }
}

const char* to_string(MipStatus status) {
  switch (status) {
    case MipStatus::optimal_within_gap: return "optimal_within_gap";
    case MipStatus::feasible_time_limit: return "feasible_time_limit";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::failure: return "failure";
  }
  return "unknown";
}

double relative_gap(double bound, double incumbent) {
  return std::abs(bound - incumbent) / std::max(std::abs(incumbent), 1e-10);
}

LpSolution solve_with_fixed_binaries(const MixedIntegerProgram& mip, const std::vector<double>& binaries,
                                     const LpOptions& options) {
  if (binaries.size() != mip.binary_vars.size())
    throw ModelError("binary assignment has the wrong length");
  LinearProgram lp = mip.base;
  for (std::size_t b = 0; b < binaries.size(); ++b) {
    const double value = binaries[b] >= 0.5 ? 1.0 : 0.0;
    const auto& v = lp.variables()[mip.binary_vars[b]];
    if (value < v.lower || value > v.upper) {
      LpSolution infeasible;
      infeasible.status = LpStatus::infeasible;
      return infeasible;
    }
    lp.set_bounds(mip.binary_vars[b], value, value);
  }
  return solve_lp(lp, options);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  double bound = kInf;  // maximization form
  std::vector<std::pair<std::size_t, double>> fixings;  // (binary slot, value)
  std::size_t seq = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.fixings.size() != b.fixings.size()) return a.fixings.size() < b.fixings.size();
    return a.seq > b.seq;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

MipSolution solve_mip(const MixedIntegerProgram& mip, const SolveOptions& options) {
  mip.validate();
  if (!(options.time_limit >= 0.0)) throw ModelError("time_limit must be nonnegative");
  if (!(options.rel_gap >= 0.0 && options.rel_gap < 1.0)) throw ModelError("rel_gap must lie in [0, 1)");

  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.time_limit));
  const double sign = mip.base.objective().sense == Sense::maximize ? 1.0 : -1.0;
  const std::size_t nbin = mip.binary_vars.size();

  MipSolution result;
  double incumbent = -kInf;  // maximization form
  auto offer = [&](const LpSolution& lp) {
    if (lp.status != LpStatus::optimal) return false;
    const double value = sign * lp.objective_value;
    if (result.has_incumbent && value <= incumbent) return false;
    incumbent = value;
    result.has_incumbent = true;
    result.objective = lp.objective_value;
    result.primal = lp.primal;
    result.binaries.resize(nbin);
    for (std::size_t b = 0; b < nbin; ++b) result.binaries[b] = std::round(lp.primal[mip.binary_vars[b]]);
    return true;
  };

  LpOptions lp_options;
  lp_options.iteration_limit = options.lp_iteration_limit;

  if (options.warm_start) {
    const LpSolution warm = solve_with_fixed_binaries(mip, *options.warm_start, lp_options);
    result.lp_iterations += warm.iterations;
    result.warm_start_accepted = offer(warm);
  }

  auto abs_tol = [&] { return 1e-9 * std::max(1.0, std::abs(incumbent)); };

  // Bound implied by the variable boxes alone; finite whenever the objective
  // only touches bounded variables, so an interrupted root still has a gap.
  double box_bound = 0.0;
  for (const Term& t : mip.base.objective().terms) {
    const Variable& v = mip.base.variables()[t.var];
    const double c = sign * t.coef;
    box_bound += c > 0.0 ? c * v.upper : c < 0.0 ? c * v.lower : 0.0;
  }
  if (std::isnan(box_bound)) box_bound = kInf;

  LinearProgram work = mip.base;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{box_bound, {}, 0});
  std::size_t next_seq = 1;
  double pruned_bound = -kInf;  // largest bound among nodes cut off by the gap rule
  double lost_bound = -kInf;    // nodes whose LP was interrupted
  double reported_bound = box_bound;
  bool root_unbounded = false;
  bool timed_out = options.time_limit <= 0.0;
  lp_options.deadline = deadline;

  auto current_bound = [&] {
    double bound = std::max({pruned_bound, lost_bound, incumbent});
    if (!open.empty()) bound = std::max(bound, open.top().bound);
    return bound;
  };
  auto gap_closed = [&] {
    if (!result.has_incumbent) return false;
    const double bound = std::min(reported_bound, current_bound());
    return bound - incumbent <= abs_tol() || relative_gap(bound, incumbent) <= options.rel_gap;
  };

  while (!timed_out && !open.empty()) {
    if (Clock::now() >= deadline) {
      timed_out = true;
      break;
    }
    if (gap_closed()) break;

    Node node = open.top();
    open.pop();
    const double cutoff = incumbent + std::max(abs_tol(), options.rel_gap * std::max(std::abs(incumbent), 1e-10));
    if (result.has_incumbent && node.bound <= cutoff) {
      if (node.bound > incumbent + abs_tol()) pruned_bound = std::max(pruned_bound, node.bound);
      continue;
    }

    for (const auto& [slot, value] : node.fixings) work.set_bounds(mip.binary_vars[slot], value, value);
    const LpSolution lp = solve_lp(work, lp_options);
    for (const auto& [slot, value] : node.fixings) {
      const auto& original = mip.base.variables()[mip.binary_vars[slot]];
      work.set_bounds(mip.binary_vars[slot], original.lower, original.upper);
    }
    ++result.nodes;
    result.lp_iterations += lp.iterations;

    auto record = [&] {
      reported_bound = std::min(reported_bound, current_bound());
      result.progress.emplace_back(sign * reported_bound, result.has_incumbent ? sign * incumbent : -sign * kInf);
    };

    if (lp.status == LpStatus::iteration_limit) {
      lost_bound = std::max(lost_bound, node.bound);
      record();
      continue;
    }
    if (lp.status == LpStatus::infeasible) {
      record();
      continue;
    }
    if (lp.status == LpStatus::unbounded) {
      if (node.fixings.empty()) root_unbounded = true;
      lost_bound = kInf;
      break;
    }
    const double value = std::min(node.bound, sign * lp.objective_value);
    if (result.has_incumbent && value <= incumbent + std::max(abs_tol(), options.rel_gap * std::max(std::abs(incumbent), 1e-10))) {
      if (value > incumbent + abs_tol()) pruned_bound = std::max(pruned_bound, value);
      record();
      continue;
    }

    std::size_t branch = nbin;
    double best_frac = 1e-6;
    for (std::size_t b = 0; b < nbin; ++b) {
      const double x = lp.primal[mip.binary_vars[b]];
      const double frac = std::min(x - std::floor(x), std::ceil(x) - x);
      if (frac > best_frac + 1e-12 ||
          (branch < nbin && std::abs(frac - best_frac) <= 1e-12 && mip.binary_vars[b] < mip.binary_vars[branch])) {
        best_frac = frac;
        branch = b;
      }
    }

    if (branch == nbin) {
      std::vector<double> rounded(nbin);
      for (std::size_t b = 0; b < nbin; ++b) rounded[b] = std::round(lp.primal[mip.binary_vars[b]]);
      LpOptions polish_options = lp_options;
      polish_options.deadline.reset();
      const LpSolution polished = solve_with_fixed_binaries(mip, rounded, polish_options);
      result.lp_iterations += polished.iterations;
      offer(polished);
      record();
      continue;
    }

    for (double v : {1.0, 0.0}) {
      Node child;
      child.bound = value;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch, v);
      child.seq = next_seq++;
      open.push(std::move(child));
    }
    record();
  }

  result.elapsed_seconds = seconds_since(start);
  if (root_unbounded) {
    result.status = MipStatus::failure;
    return result;
  }
  const double bound = std::min(reported_bound, current_bound());
  const bool exhausted = open.empty() && lost_bound == -kInf;
  if (!result.has_incumbent) {
    result.status = exhausted && !timed_out ? MipStatus::infeasible : MipStatus::failure;
    result.best_bound = sign * bound;
    return result;
  }
  result.best_bound = sign * bound;
  result.gap = bound - incumbent <= abs_tol() ? 0.0 : relative_gap(bound, incumbent);
  if (result.gap <= options.rel_gap)
    result.status = MipStatus::optimal_within_gap;
  else
    result.status = MipStatus::feasible_time_limit;
  return result;
}

}  // namespace gridrestore

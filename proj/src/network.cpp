#include "gridrestore/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

namespace gridrestore {

Network::Network(std::vector<Bus> buses, std::vector<Line> lines,
                 std::vector<Generator> generators, std::vector<Load> loads, double base_mva)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      generators_(std::move(generators)),
      loads_(std::move(loads)),
      base_mva_(base_mva) {
  if (buses_.empty()) throw NetworkError("network has no buses");
  if (!(base_mva_ > 0.0)) throw NetworkError("base_mva must be positive");

  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (!bus_pos_.emplace(to_int(buses_[i].id), i).second)
      throw NetworkError("duplicate bus id " + std::to_string(to_int(buses_[i].id)));
  }
  auto locate = [&](BusId id, const std::string& what) {
    auto it = bus_pos_.find(to_int(id));
    if (it == bus_pos_.end())
      throw NetworkError(what + " references unknown bus " + std::to_string(to_int(id)));
    return it->second;
  };

  lines_at_.resize(buses_.size());
  gens_at_.resize(buses_.size());
  loads_at_.resize(buses_.size());

  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const Line& line = lines_[l];
    const std::string what = "line " + std::to_string(to_int(line.id));
    if (!line_pos_.emplace(to_int(line.id), l).second) throw NetworkError("duplicate " + what);
    if (line.from_bus == line.to_bus) throw NetworkError(what + " is a self loop");
    if (!(line.thermal_limit >= 0.0)) throw NetworkError(what + " has negative thermal limit");
    if (!(line.angle_diff_max > 0.0) || !std::isfinite(line.angle_diff_max))
      throw NetworkError(what + " needs a positive finite angle_diff_max");
    if (!std::isfinite(line.susceptance_b) || line.susceptance_b == 0.0)
      throw NetworkError(what + " needs a finite nonzero susceptance");
    const auto f = locate(line.from_bus, what);
    const auto t = locate(line.to_bus, what);
    line_ends_.emplace_back(f, t);
    lines_at_[f].push_back(l);
    lines_at_[t].push_back(l);
  }
  std::unordered_set<int> seen;
  for (std::size_t g = 0; g < generators_.size(); ++g) {
    const auto what = "generator " + std::to_string(generators_[g].id);
    if (!seen.insert(generators_[g].id).second) throw NetworkError("duplicate " + what);
    if (!(generators_[g].p_max >= 0.0) || !std::isfinite(generators_[g].p_max))
      throw NetworkError(what + " has invalid p_max");
    gens_at_[locate(generators_[g].bus, what)].push_back(g);
  }
  seen.clear();
  for (std::size_t d = 0; d < loads_.size(); ++d) {
    const auto what = "load " + std::to_string(loads_[d].id);
    if (!seen.insert(loads_[d].id).second) throw NetworkError("duplicate " + what);
    if (!(loads_[d].p_demand >= 0.0) || !std::isfinite(loads_[d].p_demand))
      throw NetworkError(what + " has invalid p_demand");
    loads_at_[locate(loads_[d].bus, what)].push_back(d);
  }
}

std::size_t Network::bus_index(BusId id) const {
  auto it = bus_pos_.find(to_int(id));
  if (it == bus_pos_.end()) throw NetworkError("unknown bus " + std::to_string(to_int(id)));
  return it->second;
}

std::size_t Network::line_index(LineId id) const {
  auto it = line_pos_.find(to_int(id));
  if (it == line_pos_.end()) throw NetworkError("unknown line " + std::to_string(to_int(id)));
  return it->second;
}

double Network::total_demand() const {
  double sum = 0.0;
  for (const auto& load : loads_) sum += load.p_demand;
  return sum;
}

double Network::total_generation() const {
  double sum = 0.0;
  for (const auto& gen : generators_) sum += gen.p_max;
  return sum;
}

bool DamageScenario::contains(LineId id) const {
  return std::binary_search(damaged_lines.begin(), damaged_lines.end(), id);
}

DamageScenario make_damage(const Network& network, std::vector<LineId> lines) {
  std::sort(lines.begin(), lines.end());
  if (std::adjacent_find(lines.begin(), lines.end()) != lines.end())
    throw std::invalid_argument("damage list contains duplicate lines");
  for (LineId id : lines) {
    if (!network.has_line(id))
      throw std::invalid_argument("damage references unknown line " + std::to_string(to_int(id)));
  }
  DamageScenario damage;
  damage.damaged_lines = std::move(lines);
  damage.fraction = network.lines().empty()
                        ? 0.0
                        : static_cast<double>(damage.damaged_lines.size()) /
                              static_cast<double>(network.lines().size());
  return damage;
}

namespace {

// Unbiased integer in [0, bound) by rejection from the top of the range.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t value = rng();
  while (value >= limit) value = rng();
  return value % bound;
}

}  // namespace

DamageScenario random_damage(const Network& network, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("damage fraction must lie in (0, 1]");
  const std::size_t n_lines = network.lines().size();
  // The epsilon keeps products such as 0.5 * 38 from landing just below .5.
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n_lines) + 0.5 + 1e-9));

  std::vector<std::size_t> pos(n_lines);
  std::iota(pos.begin(), pos.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + draw_below(rng, n_lines - i);
    std::swap(pos[i], pos[j]);
  }
  DamageScenario damage;
  for (std::size_t i = 0; i < count; ++i) damage.damaged_lines.push_back(network.lines()[pos[i]].id);
  std::sort(damage.damaged_lines.begin(), damage.damaged_lines.end());
  damage.seed = seed;
  damage.fraction = fraction;
  return damage;
}

double PeriodSchedule::total_duration() const {
  return std::accumulate(delta.begin(), delta.end(), 0.0);
}

PeriodSchedule build_schedule(int n_damaged, int n_periods, double hours_per_period) {
  if (n_periods < 1) throw std::invalid_argument("schedule needs at least one period");
  if (n_damaged < 0) throw std::invalid_argument("negative damage count");
  if (!(hours_per_period > 0.0)) throw std::invalid_argument("period duration must be positive");
  PeriodSchedule schedule;
  schedule.n_periods = n_periods;
  schedule.delta.assign(static_cast<std::size_t>(n_periods), hours_per_period);
  for (long long k = 1; k <= n_periods; ++k) {
    // floor(k*n/N + 1/2) in exact integer arithmetic
    const long long value = (2 * k * n_damaged + n_periods) / (2LL * n_periods);
    schedule.repair_budget.push_back(static_cast<int>(value));
  }
  return schedule;
}

std::size_t RestorationPlan::n_restorations() const {
  std::size_t n = 0;
  for (const auto& period : periods) n += period.size();
  return n;
}

std::vector<LineId> RestorationPlan::sequence() const {
  std::vector<LineId> out;
  for (const auto& period : periods) out.insert(out.end(), period.begin(), period.end());
  return out;
}

RestorationPlan plan_from_sequence(std::span<const LineId> order) {
  RestorationPlan plan;
  for (LineId id : order) plan.periods.push_back({id});
  return plan;
}

void validate_plan(const RestorationPlan& plan, const DamageScenario& damage) {
  std::vector<LineId> all = plan.sequence();
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw std::invalid_argument("plan restores a line more than once");
  if (all != damage.damaged_lines)
    throw std::invalid_argument("plan does not cover exactly the damaged lines");
}

bool is_valid_plan(const RestorationPlan& plan, const DamageScenario& damage) {
  try {
    validate_plan(plan, damage);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::string format_plan(const RestorationPlan& plan) {
  std::ostringstream out;
  out << '[';
  for (std::size_t k = 0; k < plan.periods.size(); ++k) {
    if (k) out << ", ";
    out << '{';
    for (std::size_t i = 0; i < plan.periods[k].size(); ++i) {
      if (i) out << ',';
      out << to_int(plan.periods[k][i]);
    }
    out << '}';
  }
  out << ']';
  return out.str();
}

}  // namespace gridrestore

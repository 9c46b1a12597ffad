#include "instances.hpp"

#include <algorithm>
#include <numeric>
#include <limits>
#include <set>

#include "gridrestore/analysis.hpp"

namespace gridrestore::testing {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Network random_network(std::mt19937_64& rng, int n_buses, int n_lines) {
  std::vector<Bus> buses;
  for (int i = 1; i <= n_buses; ++i) buses.push_back({BusId{i}, ""});

  std::vector<std::pair<int, int>> ends;
  std::set<std::pair<int, int>> used;
  for (int i = 2; i <= n_buses; ++i) {
    const int j = uniform_int(rng, 1, i - 1);
    ends.emplace_back(j, i);
    used.insert({j, i});
  }
  const int max_pairs = n_buses * (n_buses - 1) / 2;
  while (static_cast<int>(ends.size()) < n_lines) {
    int a = uniform_int(rng, 1, n_buses), b = uniform_int(rng, 1, n_buses);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (static_cast<int>(used.size()) < max_pairs && used.contains({a, b})) continue;
    used.insert({a, b});
    ends.emplace_back(a, b);
  }

  std::vector<Line> lines;
  for (std::size_t l = 0; l < ends.size(); ++l) {
    const double x = uniform_real(rng, 0.05, 0.5);
    const double b = -1.0 / x;
    const double cap = uniform_real(rng, 0.2, 1.0) * std::min(1.5, std::abs(b) * kDefaultAngleDiffMax);
    lines.push_back({LineId{static_cast<int>(l) + 1}, BusId{ends[l].first}, BusId{ends[l].second}, b, cap,
                     kDefaultAngleDiffMax});
  }

  std::vector<int> order(static_cast<std::size_t>(n_buses));
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_gens = uniform_int(rng, 1, std::max(1, n_buses / 3));
  std::vector<Generator> gens;
  for (int g = 0; g < n_gens; ++g)
    gens.push_back({g + 1, BusId{order[static_cast<std::size_t>(g)]}, uniform_real(rng, 0.8, 2.5)});
  std::vector<Load> loads;
  int load_id = 1;
  for (int i = n_gens; i < n_buses; ++i)
    loads.push_back({load_id++, BusId{order[static_cast<std::size_t>(i)]}, uniform_real(rng, 0.2, 1.0)});
  // A load sharing a bus with a generator exercises islanded supply.
  if (uniform_int(rng, 0, 2) == 0) loads.push_back({load_id++, BusId{order[0]}, uniform_real(rng, 0.1, 0.4)});
  return Network(std::move(buses), std::move(lines), std::move(gens), std::move(loads));
}

Instance random_instance(std::uint64_t seed, const InstanceShape& shape) {
  std::mt19937_64 rng(seed);
  const int n_buses = uniform_int(rng, shape.min_buses, shape.max_buses);
  const int n_lines = std::max(uniform_int(rng, shape.min_lines, shape.max_lines), n_buses - 1);
  Network network = random_network(rng, n_buses, n_lines);
  const int n_damaged = std::min(uniform_int(rng, shape.min_damaged, shape.max_damaged), n_lines);
  std::vector<LineId> ids;
  for (const Line& l : network.lines()) ids.push_back(l.id);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(static_cast<std::size_t>(n_damaged));
  DamageScenario damage = make_damage(network, ids);
  return {std::move(network), std::move(damage)};
}

Network three_bus_reference() {
  std::vector<Bus> buses{{BusId{1}, ""}, {BusId{2}, ""}, {BusId{3}, ""}};
  std::vector<Line> lines{{LineId{1}, BusId{1}, BusId{2}, -10.0, 2.0, kDefaultAngleDiffMax},
                          {LineId{2}, BusId{1}, BusId{3}, -10.0, 2.0, kDefaultAngleDiffMax},
                          {LineId{3}, BusId{2}, BusId{3}, -10.0, 0.2, kDefaultAngleDiffMax}};
  std::vector<Generator> gens{{1, BusId{1}, 2.0}};
  std::vector<Load> loads{{1, BusId{2}, 1.0}, {2, BusId{3}, 0.5}};
  return Network(std::move(buses), std::move(lines), std::move(gens), std::move(loads));
}


Network braess_network() {
  std::vector<Bus> buses{{BusId{1}, ""}, {BusId{2}, ""}, {BusId{3}, ""}};
  std::vector<Line> lines{{LineId{1}, BusId{1}, BusId{2}, -10.0, 5.0, kDefaultAngleDiffMax},
                          {LineId{2}, BusId{2}, BusId{3}, -10.0, 5.0, kDefaultAngleDiffMax},
                          {LineId{3}, BusId{1}, BusId{3}, -10.0, 0.1, kDefaultAngleDiffMax},
                          {LineId{4}, BusId{1}, BusId{3}, -10.0, 0.1, kDefaultAngleDiffMax}};
  std::vector<Generator> gens{{1, BusId{1}, 2.0}};
  std::vector<Load> loads{{1, BusId{3}, 1.0}};
  return Network(std::move(buses), std::move(lines), std::move(gens), std::move(loads));
}


bool delivery_is_monotone(const Network& network, const DamageScenario& damage) {
  DeliveryEvaluator evaluator(network);
  const std::size_t n = damage.size();
  std::vector<std::size_t> pos;
  for (LineId id : damage.damaged_lines) pos.push_back(network.line_index(id));
  auto mask_of = [&](std::size_t subset) {
    std::vector<char> mask(network.lines().size(), 1);
    for (std::size_t i = 0; i < n; ++i)
      if (!(subset >> i & 1U)) mask[pos[i]] = 0;
    return mask;
  };
  for (std::size_t s = 0; s < (std::size_t{1} << n); ++s) {
    const double base = evaluator.period(mask_of(s)).delivered;
    for (std::size_t i = 0; i < n; ++i) {
      if (s >> i & 1U) continue;
      const double grown = evaluator.period(mask_of(s | std::size_t{1} << i)).delivered;
      if (grown < base - 1e-9 * std::max(1.0, base)) return false;
    }
  }
  return true;
}

double assignment_enumeration_optimum(const Network& network, const DamageScenario& damage,
                                      const PeriodSchedule& schedule) {
  DeliveryEvaluator evaluator(network);
  const std::size_t n = damage.size();
  const auto periods = static_cast<std::size_t>(schedule.n_periods);
  std::vector<std::size_t> at(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    RestorationPlan plan;
    plan.periods.resize(periods);
    for (std::size_t i = 0; i < n; ++i) plan.periods[at[i]].push_back(damage.damaged_lines[i]);
    bool within = true;
    std::size_t cumulative = 0;
    for (std::size_t k = 0; k < periods && within; ++k) {
      cumulative += plan.periods[k].size();
      within = cumulative <= static_cast<std::size_t>(schedule.repair_budget[k]);
    }
    if (within) best = std::max(best, total_energy(evaluator.evaluate(damage, plan, schedule)));
    std::size_t i = 0;
    while (i < n && ++at[i] == periods) at[i++] = 0;
    if (i == n) break;
  }
  return best;
}

Instance monotone_instance(std::uint64_t seed, const InstanceShape& shape, int* rejected) {
  for (std::uint64_t s = seed;; s += 7919) {
    Instance inst = random_instance(s, shape);
    if (delivery_is_monotone(inst.network, inst.damage)) return inst;
    if (rejected) ++*rejected;
  }
}

}  // namespace gridrestore::testing

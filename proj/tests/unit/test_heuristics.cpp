#include <gtest/gtest.h>

#include "gridrestore/analysis.hpp"
#include "gridrestore/heuristics.hpp"
#include "instances.hpp"

using namespace gridrestore;
namespace fixtures = gridrestore::testing;
using gridrestore::testing::Instance;

namespace {

Network star(std::vector<double> limits) {
  std::vector<Bus> buses{{BusId{1}, ""}};
  std::vector<Line> lines;
  std::vector<Load> loads;
  for (std::size_t i = 0; i < limits.size(); ++i) {
    const int bus = static_cast<int>(i) + 2;
    buses.push_back({BusId{bus}, ""});
    lines.push_back({LineId{static_cast<int>(i) + 1}, BusId{1}, BusId{bus}, -10.0, limits[i], kDefaultAngleDiffMax});
    loads.push_back({static_cast<int>(i) + 1, BusId{bus}, 0.1});
  }
  return Network(std::move(buses), std::move(lines), {{1, BusId{1}, 5.0}}, std::move(loads));
}

std::vector<LineId> ids(std::initializer_list<int> values) {
  std::vector<LineId> out;
  for (int v : values) out.push_back(LineId{v});
  return out;
}

MipBackend failing_backend() {
  return [](const MixedIntegerProgram&, const SolveOptions&) { return MipSolution{}; };
}

double raw_energy(const Network& net, const DamageScenario& d, const RestorationPlan& plan) {
  const int n = static_cast<int>(plan.n_periods());
  return total_energy(evaluate_plan(net, d, plan, build_schedule(static_cast<int>(d.size()), n)));
}

}  // namespace

TEST(Util, LargestLimitFirst) {
  const Network net = star({0.3, 0.5, 0.2});
  const DamageScenario d = make_damage(net, ids({1, 2, 3}));
  EXPECT_EQ(util_order(net, d), plan_from_sequence(ids({2, 1, 3})));
}

TEST(Util, EqualLimitsKeepIndexOrder) {
  const Network net = star({0.4, 0.4, 0.4, 0.4});
  const DamageScenario d = make_damage(net, ids({4, 2, 3, 1}));
  EXPECT_EQ(util_sequence(net, d.damaged_lines), ids({1, 2, 3, 4}));
}

TEST(Util, TiesBrokenByEndpointsBeforeId) {
  const Network net({{BusId{1}, ""}, {BusId{2}, ""}, {BusId{3}, ""}},
                    {{LineId{1}, BusId{2}, BusId{3}, -10.0, 1.0, kDefaultAngleDiffMax},
                     {LineId{2}, BusId{1}, BusId{3}, -10.0, 1.0, kDefaultAngleDiffMax},
                     {LineId{3}, BusId{1}, BusId{2}, -10.0, 1.0, kDefaultAngleDiffMax},
                     {LineId{4}, BusId{1}, BusId{2}, -10.0, 1.0, kDefaultAngleDiffMax},
                     {LineId{5}, BusId{3}, BusId{1}, -10.0, kUnlimited, kDefaultAngleDiffMax}},
                    {}, {});
  EXPECT_EQ(util_sequence(net, ids({1, 2, 3, 4, 5})), ids({5, 3, 4, 2, 1}));
}

TEST(Util, SingleLine) {
  const Network net = star({0.3});
  const RestorationPlan plan = util_order(net, make_damage(net, ids({1})));
  ASSERT_EQ(plan.n_periods(), 1u);
  EXPECT_EQ(plan.periods[0], ids({1}));
}

TEST(Rrr, SingleLineNeedsNoSolve) {
  const Network net = star({0.3, 0.2});
  RrrStats stats;
  const RestorationPlan plan = rrr(net, make_damage(net, ids({2})), {}, {}, &stats);
  EXPECT_EQ(plan, plan_from_sequence(ids({2})));
  EXPECT_EQ(stats.sub_solves, 0u);
}

TEST(Rrr, ThreeBusMatchesEnumeration) {
  const Network net = fixtures::three_bus_reference();
  const DamageScenario d = make_damage(net, ids({1, 2}));
  const RestorationPlan plan = rrr(net, d, {});
  const auto [best, energy] = brute_force_optimal(net, d, build_schedule(2, 2));
  EXPECT_EQ(plan, best);
  EXPECT_EQ(plan, plan_from_sequence(ids({1, 2})));
  EXPECT_NEAR(energy, 2.7, 1e-9);
}

TEST(Rrr, ZeroSubLimitFallsBackToUtil) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = fixtures::random_instance(seed);
    RrrOptions options;
    options.sub_time_limit = 0.0;
    EXPECT_EQ(rrr(inst.network, inst.damage, {}, options), util_order(inst.network, inst.damage));
  }
}

TEST(Rrr, FailingBackendStillPartitions) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    fixtures::InstanceShape shape;
    shape.max_damaged = 9;
    shape.max_lines = 12;
    const Instance inst = fixtures::random_instance(seed, shape);
    RrrOptions options;
    options.backend = failing_backend();
    RrrStats stats;
    const RestorationPlan plan = rrr(inst.network, inst.damage, {}, options, &stats);
    EXPECT_TRUE(is_valid_plan(plan, inst.damage));
    EXPECT_EQ(plan.n_periods(), inst.damage.size());
    EXPECT_EQ(plan, util_order(inst.network, inst.damage));
    EXPECT_EQ(stats.failures, stats.sub_solves);
  }
}

TEST(Rrr, SubSolveCountsAndSizes) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    fixtures::InstanceShape shape;
    shape.max_damaged = 7;
    const Instance inst = fixtures::random_instance(seed, shape);
    RrrStats stats;
    const RestorationPlan plan = rrr(inst.network, inst.damage, {}, {}, &stats);
    const std::size_t n = inst.damage.size();
    EXPECT_TRUE(is_valid_plan(plan, inst.damage));
    EXPECT_EQ(plan.n_periods(), n);
    EXPECT_LE(stats.sub_solves, 2 * n - 1);
    EXPECT_LE(stats.max_binaries, 2 * n);
  }
}

TEST(Rrr, TopSplitIsTheTwoPeriodOptimum) {
  for (std::uint64_t seed = 300; seed < 312; ++seed) {
    const Instance inst = fixtures::random_instance(seed);
    AlgoBudget budget;
    budget.rel_gap = 0.0;
    RrrStats stats;
    rrr(inst.network, inst.damage, budget, {}, &stats);
    ASSERT_TRUE(stats.top_split_objective.has_value());
    const int n = static_cast<int>(inst.damage.size());
    EXPECT_NEAR(*stats.top_split_objective,
                fixtures::assignment_enumeration_optimum(inst.network, inst.damage, build_schedule(n, 2)), 1e-6)
        << "seed " << seed;
  }
}

TEST(Rrr, EmptyFirstPeriodReturnsUtilOrder) {
  // Either weak line alone lowers delivery, so the best split restores nothing first.
  const Network net = fixtures::braess_network();
  const DamageScenario d = make_damage(net, ids({3, 4}));
  AlgoBudget budget;
  budget.rel_gap = 0.0;
  RrrStats stats;
  const RestorationPlan plan = rrr(net, d, budget, {}, &stats);
  EXPECT_EQ(stats.empty_first, 1u);
  EXPECT_EQ(plan, util_order(net, d));
}

TEST(Rrr, ParallelMatchesSerial) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    fixtures::InstanceShape shape;
    shape.min_damaged = 5;
    shape.max_damaged = 7;
    const Instance inst = fixtures::random_instance(seed, shape);
    AlgoBudget budget;
    budget.time_limit = 600.0;
    RrrOptions serial, parallel;
    parallel.parallel = true;
    EXPECT_EQ(rrr(inst.network, inst.damage, budget, serial), rrr(inst.network, inst.damage, budget, parallel));
  }
}

TEST(Rrr, RejectsNonPositiveTime) {
  const Network net = star({0.3, 0.2});
  AlgoBudget budget;
  budget.time_limit = 0.0;
  EXPECT_THROW(rrr(net, make_damage(net, ids({1, 2})), budget), std::invalid_argument);
}

TEST(Rad, ZeroStallReturnsInitial) {
  const Instance inst = fixtures::random_instance(3);
  RadConfig config;
  config.stall_limit = 0;
  const RestorationPlan initial = plan_from_sequence(inst.damage.damaged_lines);
  RadStats stats;
  EXPECT_EQ(rad(inst.network, inst.damage, {}, config, initial, {}, &stats), initial);
  EXPECT_EQ(stats.iterations, 0u);
  EXPECT_EQ(stats.block_solves, 0u);
}

TEST(Rad, TwoLinesMatchRrrTopSplit) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    fixtures::InstanceShape shape;
    shape.min_damaged = shape.max_damaged = 2;
    const Instance inst = fixtures::monotone_instance(seed, shape);
    AlgoBudget budget;
    budget.rel_gap = 0.0;
    budget.time_limit = 30.0;
    RrrStats rrr_stats;
    rrr(inst.network, inst.damage, budget, {}, &rrr_stats);
    ASSERT_TRUE(rrr_stats.top_split_objective.has_value());

    RadConfig config;
    config.stall_limit = 2;
    for (const auto& initial : {util_order(inst.network, inst.damage),
                                plan_from_sequence(inst.damage.damaged_lines)}) {
      const RestorationPlan plan = rad(inst.network, inst.damage, budget, config, initial);
      EXPECT_NEAR(raw_energy(inst.network, inst.damage, plan), *rrr_stats.top_split_objective, 1e-6)
          << "seed " << seed;
    }
  }
}

TEST(Rad, NeverWorseThanInitialAndTraceNondecreasing) {
  std::mt19937_64 rng(10);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    fixtures::InstanceShape shape;
    shape.min_damaged = 4;
    shape.max_damaged = 7;
    const Instance inst = fixtures::random_instance(seed, shape);
    std::vector<LineId> order = inst.damage.damaged_lines;
    std::shuffle(order.begin(), order.end(), rng);
    const RestorationPlan initial = plan_from_sequence(order);
    AlgoBudget budget;
    budget.time_limit = 2.0;
    budget.seed = seed;
    RadConfig config;
    config.stall_limit = 5;
    RadStats stats;
    const RestorationPlan plan = rad(inst.network, inst.damage, budget, config, initial, {}, &stats);
    EXPECT_TRUE(is_valid_plan(plan, inst.damage));
    EXPECT_EQ(plan.n_periods(), inst.damage.size());

    const int n = static_cast<int>(inst.damage.size());
    const PeriodSchedule s = build_schedule(n, n);
    DeliveryEvaluator evaluator(inst.network);
    const double before = post_processed_energy(evaluator, inst.damage, initial, s);
    const double after = post_processed_energy(evaluator, inst.damage, plan, s);
    EXPECT_GE(after, before - 1e-12);
    ASSERT_FALSE(stats.energy_trace.empty());
    EXPECT_DOUBLE_EQ(stats.energy_trace.front(), before);
    EXPECT_DOUBLE_EQ(stats.energy_trace.back(), after);
    for (std::size_t i = 1; i < stats.energy_trace.size(); ++i)
      EXPECT_GE(stats.energy_trace[i], stats.energy_trace[i - 1]);
    EXPECT_EQ(stats.energy_trace.size(), stats.accepted_blocks + 1);
  }
}

TEST(Rad, DeterministicForSeed) {
  fixtures::InstanceShape shape;
  shape.min_damaged = shape.max_damaged = 6;
  const Instance inst = fixtures::random_instance(77, shape);
  AlgoBudget budget;
  budget.time_limit = 300.0;
  budget.seed = 5;
  RadConfig config;
  config.stall_limit = 3;
  const RestorationPlan initial = util_order(inst.network, inst.damage);
  EXPECT_EQ(rad(inst.network, inst.damage, budget, config, initial),
            rad(inst.network, inst.damage, budget, config, initial));
}

TEST(Rad, ConfigValidation) {
  RadConfig c;
  EXPECT_NO_THROW(c.validate());
  c.min_partition = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.max_partition = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.initial_time_fraction = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.adapt_threshold = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.growth_factor = 0.9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.stall_limit = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Rad, RejectsInvalidInitialPlan) {
  const Network net = star({0.3, 0.2});
  const DamageScenario d = make_damage(net, ids({1, 2}));
  EXPECT_THROW(rad(net, d, {}, {}, plan_from_sequence(ids({1}))), std::invalid_argument);
}

TEST(BruteForce, NoDamage) {
  const Network net = fixtures::three_bus_reference();
  const auto [plan, energy] = brute_force_optimal(net, {}, build_schedule(0, 3, 0.5));
  EXPECT_EQ(plan, (RestorationPlan{{{}, {}, {}}}));
  EXPECT_NEAR(energy, 3 * 0.5 * 1.5, 1e-9);
}

TEST(BruteForce, SingleLine) {
  const Network net = fixtures::three_bus_reference();
  const DamageScenario d = make_damage(net, ids({3}));
  const auto [plan, energy] = brute_force_optimal(net, d, build_schedule(1, 1));
  EXPECT_EQ(plan, plan_from_sequence(ids({3})));
  EXPECT_NEAR(energy, 1.5, 1e-9);
}

TEST(BruteForce, SymmetricLinesTieToSmallestPlan) {
  const Network net({{BusId{1}, ""}, {BusId{2}, ""}},
                    {{LineId{1}, BusId{1}, BusId{2}, -10.0, 0.6, kDefaultAngleDiffMax},
                     {LineId{2}, BusId{1}, BusId{2}, -10.0, 0.6, kDefaultAngleDiffMax}},
                    {{1, BusId{1}, 2.0}}, {{1, BusId{2}, 1.0}});
  const DamageScenario d = make_damage(net, ids({1, 2}));
  const PeriodSchedule s = build_schedule(2, 2);
  EXPECT_NEAR(raw_energy(net, d, plan_from_sequence(ids({1, 2}))), raw_energy(net, d, plan_from_sequence(ids({2, 1}))),
              1e-12);
  const auto [plan, energy] = brute_force_optimal(net, d, s);
  EXPECT_EQ(plan, plan_from_sequence(ids({1, 2})));
  EXPECT_NEAR(energy, 0.6 + 1.0, 1e-9);
}

TEST(BruteForce, SizeGuard) {
  std::mt19937_64 rng(1);
  const Network net = fixtures::random_network(rng, 6, 10);
  const DamageScenario d = random_damage(net, 0.8, 1);
  EXPECT_THROW(brute_force_optimal(net, d, build_schedule(8, 8)), std::invalid_argument);
}

TEST(BruteForce, DominatesEveryOrdering) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = fixtures::random_instance(seed);
    const int n = static_cast<int>(inst.damage.size());
    const PeriodSchedule s = build_schedule(n, n);
    const auto [best, energy] = brute_force_optimal(inst.network, inst.damage, s);
    DeliveryEvaluator evaluator(inst.network);
    EXPECT_NEAR(post_processed_energy(evaluator, inst.damage, best, s), energy, 1e-12);
    std::vector<LineId> perm = inst.damage.damaged_lines;
    do {
      EXPECT_LE(post_processed_energy(evaluator, inst.damage, plan_from_sequence(perm), s), energy + 1e-9);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "gridrestore/lp.hpp"
#include "gridrestore/mps.hpp"
#include "gridrestore/milp.hpp"

using namespace gridrestore;

namespace {

void expect_certified(const LinearProgram& lp, const LpSolution& sol) {
  ASSERT_EQ(sol.status, LpStatus::optimal);
  ASSERT_EQ(sol.primal.size(), lp.num_variables());
  EXPECT_LE(lp.max_row_violation(sol.primal), 1e-7);
  EXPECT_LE(lp.max_bound_violation(sol.primal), 1e-9);
  EXPECT_NEAR(lp.objective_value(sol.primal), sol.objective_value, 1e-9);
}

// Best objective over all vertices of a 3-variable box-bounded polytope:
// every triple of tight hyperplanes, solved by Cramer's rule.
std::optional<double> vertex_enumeration(const LinearProgram& lp) {
  struct Plane {
    std::array<double, 3> a;
    double rhs;
  };
  std::vector<Plane> planes;
  for (std::size_t j = 0; j < 3; ++j) {
    std::array<double, 3> e{};
    e[j] = 1.0;
    planes.push_back({e, lp.variables()[j].lower});
    planes.push_back({e, lp.variables()[j].upper});
  }
  for (const Constraint& c : lp.constraints()) {
    std::array<double, 3> a{};
    for (const Term& t : c.terms) a[t.var] += t.coef;
    planes.push_back({a, c.rhs});
  }
  auto det = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  std::optional<double> best;
  const double sign = lp.objective().sense == Sense::maximize ? 1.0 : -1.0;
  for (std::size_t p = 0; p < planes.size(); ++p)
    for (std::size_t q = p + 1; q < planes.size(); ++q)
      for (std::size_t r = q + 1; r < planes.size(); ++r) {
        const std::array<std::array<double, 3>, 3> m{planes[p].a, planes[q].a, planes[r].a};
        const double d = det(m);
        if (std::abs(d) < 1e-9) continue;
        std::array<double, 3> x{};
        for (std::size_t j = 0; j < 3; ++j) {
          auto mj = m;
          mj[0][j] = planes[p].rhs;
          mj[1][j] = planes[q].rhs;
          mj[2][j] = planes[r].rhs;
          x[j] = det(mj) / d;
        }
        if (lp.max_row_violation(x) > 1e-7 || lp.max_bound_violation(x) > 1e-7) continue;
        const double value = lp.objective_value(x);
        if (!best || sign * value > sign * *best) best = value;
      }
  return best;
}

LinearProgram random_lp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> rel(0, 4);
  LinearProgram lp;
  for (int j = 0; j < 3; ++j) {
    const double lo = std::floor(coef(rng));
    lp.add_variable("x" + std::to_string(j), lo, lo + 1.0 + std::abs(coef(rng)) * 2.0);
  }
  const int rows = 2 + static_cast<int>(rng() % 4);
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (std::size_t j = 0; j < 3; ++j) terms.push_back({j, coef(rng)});
    const int r = rel(rng);
    const Relation relation = r == 0 ? Relation::equal : r <= 2 ? Relation::less_equal : Relation::greater_equal;
    lp.add_constraint("c" + std::to_string(i), std::move(terms), relation, coef(rng));
  }
  lp.set_objective(rng() % 2 ? Sense::maximize : Sense::minimize, {{0, coef(rng)}, {1, coef(rng)}, {2, coef(rng)}});
  return lp;
}

}  // namespace

TEST(SolveLp, SingleConstraint) {
  LinearProgram lp;
  const auto x = lp.add_variable("x", 0.0, 10.0);
  lp.add_constraint("cap", {{x, 1.0}}, Relation::less_equal, 3.0);
  lp.set_objective(Sense::maximize, {{x, 1.0}});
  const LpSolution sol = solve_lp(lp);
  expect_certified(lp, sol);
  EXPECT_DOUBLE_EQ(sol.objective_value, 3.0);
}

TEST(SolveLp, DegenerateOptimum) {
  LinearProgram lp;
  const auto x = lp.add_variable("x");
  const auto y = lp.add_variable("y");
  lp.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, Relation::less_equal, 1.0);
  lp.set_objective(Sense::maximize, {{x, 1.0}, {y, 1.0}});
  const LpSolution sol = solve_lp(lp);
  expect_certified(lp, sol);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-12);
}

TEST(SolveLp, EqualityAndFreeVariables) {
  LinearProgram lp;
  const auto x = lp.add_variable("x", -kInf, kInf);
  const auto y = lp.add_variable("y", -kInf, kInf);
  lp.add_constraint("diff", {{x, 1.0}, {y, -1.0}}, Relation::equal, 2.0);
  lp.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Relation::less_equal, 4.0);
  lp.set_objective(Sense::maximize, {{x, 1.0}});
  const LpSolution sol = solve_lp(lp);
  expect_certified(lp, sol);
  EXPECT_NEAR(sol.primal[x], 3.0, 1e-9);
  EXPECT_NEAR(sol.primal[y], 1.0, 1e-9);
}

TEST(SolveLp, NegativeLowerBoundsAndMinimization) {
  LinearProgram lp;
  const auto x = lp.add_variable("x", -5.0, 5.0);
  const auto y = lp.add_variable("y", -2.0, 3.0);
  lp.add_constraint("floor", {{x, 1.0}, {y, 2.0}}, Relation::greater_equal, -4.0);
  lp.set_objective(Sense::minimize, {{x, 1.0}, {y, 1.0}});
  const LpSolution sol = solve_lp(lp);
  expect_certified(lp, sol);
  // x + 2y >= -4 with x >= -5: minimum of x + y is at x = -5, y = 0.5 or y = -2, x = 0
  EXPECT_NEAR(sol.objective_value, -4.5, 1e-9);
}

TEST(SolveLp, FixedVariablesAreSubstituted) {
  LinearProgram lp;
  const auto x = lp.add_variable("x", 2.0, 2.0);
  const auto y = lp.add_variable("y", 0.0, 10.0);
  lp.add_constraint("link", {{x, 1.0}, {y, 1.0}}, Relation::less_equal, 5.0);
  lp.set_objective(Sense::maximize, {{x, 4.0}, {y, 1.0}});
  const LpSolution sol = solve_lp(lp);
  expect_certified(lp, sol);
  EXPECT_DOUBLE_EQ(sol.primal[x], 2.0);
  EXPECT_NEAR(sol.objective_value, 11.0, 1e-9);
}

TEST(SolveLp, Infeasible) {
  LinearProgram lp;
  const auto x = lp.add_variable("x", 0.0, 1.0);
  lp.add_constraint("low", {{x, 1.0}}, Relation::greater_equal, 2.0);
  lp.set_objective(Sense::maximize, {{x, 1.0}});
  EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);
}

TEST(SolveLp, Unbounded) {
  LinearProgram lp;
  const auto x = lp.add_variable("x");
  const auto y = lp.add_variable("y");
  lp.add_constraint("gap", {{x, 1.0}, {y, -1.0}}, Relation::less_equal, 1.0);
  lp.set_objective(Sense::maximize, {{x, 1.0}, {y, 1.0}});
  EXPECT_EQ(solve_lp(lp).status, LpStatus::unbounded);
}

TEST(SolveLp, EmptyProgram) {
  LinearProgram lp;
  lp.add_variable("x", 1.0, 4.0);
  const LpSolution sol = solve_lp(lp);
  expect_certified(lp, sol);
  EXPECT_EQ(sol.objective_value, 0.0);
}

TEST(SolveLp, IterationLimitIsNotOptimal) {
  LinearProgram lp;
  std::vector<Term> sum;
  for (int j = 0; j < 6; ++j) {
    const auto v = lp.add_variable("x" + std::to_string(j), 0.0, 1.0);
    lp.add_constraint("r" + std::to_string(j), {{v, 1.0}}, Relation::less_equal, 0.5 + j);
    sum.push_back({v, 1.0 + j});
  }
  lp.add_constraint("total", sum, Relation::less_equal, 10.0);
  lp.set_objective(Sense::maximize, sum);
  EXPECT_EQ(solve_lp(lp, std::size_t{1}).status, LpStatus::iteration_limit);
  EXPECT_EQ(solve_lp(lp, std::size_t{1000}).status, LpStatus::optimal);
}

TEST(SolveLp, ExpiredDeadlineStops) {
  LinearProgram lp;
  const auto x = lp.add_variable("x");
  const auto y = lp.add_variable("y");
  lp.add_constraint("a", {{x, 1.0}, {y, 2.0}}, Relation::less_equal, 4.0);
  lp.add_constraint("b", {{x, 3.0}, {y, 1.0}}, Relation::less_equal, 6.0);
  lp.set_objective(Sense::maximize, {{x, 1.0}, {y, 1.0}});
  LpOptions options;
  options.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  EXPECT_EQ(solve_lp(lp, options).status, LpStatus::iteration_limit);
}

TEST(SolveLp, DeterministicAcrossCalls) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const LinearProgram lp = random_lp(rng);
    const LpSolution a = solve_lp(lp), b = solve_lp(lp);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.primal, b.primal);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(20240611);
  int optimal = 0, infeasible = 0;
  for (int i = 0; i < 300; ++i) {
    const LinearProgram lp = random_lp(rng);
    const LpSolution sol = solve_lp(lp);
    const std::optional<double> oracle = vertex_enumeration(lp);
    if (!oracle) {
      EXPECT_EQ(sol.status, LpStatus::infeasible) << "instance " << i;
      ++infeasible;
      continue;
    }
    expect_certified(lp, sol);
    EXPECT_NEAR(sol.objective_value, *oracle, 1e-6 * std::max(1.0, std::abs(*oracle))) << "instance " << i;
    ++optimal;
  }
  EXPECT_GT(optimal, 50);
  EXPECT_GT(infeasible, 10);
}

TEST(SolveLp, HighlyDegenerateAssignmentPolytope) {
  // 5x5 assignment relaxation: many degenerate vertices, integral optimum.
  constexpr int n = 5;
  const int cost[n][n] = {{7, 3, 9, 1, 4}, {2, 8, 6, 5, 3}, {4, 4, 4, 4, 4}, {9, 1, 3, 7, 2}, {5, 6, 2, 8, 9}};
  LinearProgram lp;
  std::vector<Term> obj;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) obj.push_back({lp.add_variable("a" + std::to_string(i * n + j), 0.0, 1.0), 1.0 * cost[i][j]});
  for (int i = 0; i < n; ++i) {
    std::vector<Term> row, col;
    for (int j = 0; j < n; ++j) {
      row.push_back({static_cast<std::size_t>(i * n + j), 1.0});
      col.push_back({static_cast<std::size_t>(j * n + i), 1.0});
    }
    lp.add_constraint("row" + std::to_string(i), row, Relation::equal, 1.0);
    lp.add_constraint("col" + std::to_string(i), col, Relation::equal, 1.0);
  }
  lp.set_objective(Sense::maximize, obj);
  std::array<int, n> perm{0, 1, 2, 3, 4};
  int best = 0;
  do {
    int s = 0;
    for (int i = 0; i < n; ++i) s += cost[i][perm[static_cast<std::size_t>(i)]];
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  LpOptions options;
  options.degeneracy_threshold = 1;
  const LpSolution sol = solve_lp(lp, options);
  expect_certified(lp, sol);
  EXPECT_NEAR(sol.objective_value, best, 1e-9);
}

TEST(LinearProgram, ModelErrors) {
  LinearProgram lp;
  const auto x = lp.add_variable("x");
  EXPECT_THROW(lp.add_variable("x"), ModelError);
  EXPECT_THROW(lp.set_bounds(5, 0.0, 1.0), ModelError);

  LinearProgram crossed;
  crossed.add_variable("y", 2.0, 1.0);
  EXPECT_THROW(crossed.validate(), ModelError);
  EXPECT_THROW(solve_lp(crossed), ModelError);

  LinearProgram nan_coef;
  const auto z = nan_coef.add_variable("z");
  nan_coef.add_constraint("bad", {{z, std::nan("")}}, Relation::less_equal, 1.0);
  EXPECT_THROW(nan_coef.validate(), ModelError);

  LinearProgram out_of_range;
  out_of_range.add_variable("w");
  out_of_range.add_constraint("bad", {{3, 1.0}}, Relation::less_equal, 1.0);
  EXPECT_THROW(out_of_range.validate(), ModelError);
  (void)x;
}

TEST(LinearProgram, ViolationMeasures) {
  LinearProgram lp;
  const auto x = lp.add_variable("x", 0.0, 1.0);
  lp.add_constraint("cap", {{x, 2.0}}, Relation::less_equal, 1.0);
  lp.add_constraint("eq", {{x, 1.0}}, Relation::equal, 0.25);
  lp.set_objective(Sense::maximize, {{x, 3.0}});
  const std::vector<double> at{1.5};
  EXPECT_DOUBLE_EQ(lp.max_row_violation(at), 2.0);
  EXPECT_DOUBLE_EQ(lp.max_bound_violation(at), 0.5);
  EXPECT_DOUBLE_EQ(lp.objective_value(at), 4.5);
}

TEST(Mps, SingleVariableHasOneColumnEntry) {
  LinearProgram lp;
  lp.add_variable("only", 0.0, 2.0);
  const std::string text = write_mps(lp);
  EXPECT_NE(text.find("COLUMNS"), std::string::npos);
  EXPECT_NE(text.find(" C0000001 "), std::string::npos);
  EXPECT_EQ(text.find("INTORG"), std::string::npos);
}

TEST(Mps, BinaryInsideMarkers) {
  MixedIntegerProgram mip;
  const auto x = mip.base.add_variable("x", 0.0, 4.0);
  const auto z = mip.base.add_variable("z", 0.0, 1.0);
  mip.base.add_constraint("link", {{x, 1.0}, {z, -4.0}}, Relation::less_equal, 0.0);
  mip.base.set_objective(Sense::maximize, {{x, 1.0}, {z, -0.5}});
  mip.binary_vars = {z};
  const std::string text = write_mps(mip);
  const auto org = text.find("'INTORG'"), end = text.find("'INTEND'"), col = text.find(" C0000002 ");
  ASSERT_NE(org, std::string::npos);
  ASSERT_NE(end, std::string::npos);
  EXPECT_LT(org, col);
  EXPECT_LT(col, end);
  EXPECT_EQ(text, write_mps(mip));
}

const char* const kGoldenMps = R"mps(* gridrestore fixed-format MPS
* variables 3, constraints 3, binaries 1
* objective sense maximize: coefficients negated
NAME          GRIDRST
ROWS
 N  OBJ
 L  R0000001
 G  R0000002
 E  R0000003
COLUMNS
    C0000001  OBJ       -2
    C0000001  R0000001  1
    C0000001  R0000003  1
    C0000002  R0000001  1
    C0000002  R0000002  1
    MARK0000  'MARKER'                 'INTORG'
    C0000003  OBJ       -1
    C0000003  R0000002  2
    C0000003  R0000003  -1
    MARK0001  'MARKER'                 'INTEND'
RHS
    RHS       R0000001  3
    RHS       R0000002  -1.5
RANGES
BOUNDS
 LO BND       C0000001  -1
 UP BND       C0000001  4
 FR BND       C0000002
 UP BND       C0000003  1
ENDATA
)mps";

TEST(Mps, GoldenText) {
  MixedIntegerProgram mip;
  const auto x = mip.base.add_variable("x", -1.0, 4.0);
  const auto y = mip.base.add_variable("y", -kInf, kInf);
  const auto z = mip.base.add_variable("z", 0.0, 1.0);
  mip.base.add_constraint("a", {{x, 1.0}, {y, 1.0}}, Relation::less_equal, 3.0);
  mip.base.add_constraint("b", {{y, 1.0}, {z, 2.0}}, Relation::greater_equal, -1.5);
  mip.base.add_constraint("c", {{x, 1.0}, {z, -1.0}}, Relation::equal, 0.0);
  mip.base.set_objective(Sense::maximize, {{x, 2.0}, {z, 1.0}});
  mip.binary_vars = {z};
  EXPECT_EQ(write_mps(mip), kGoldenMps);
}

TEST(Mps, Names) {
  EXPECT_EQ(mps_column_name(0), "C0000001");
  EXPECT_EQ(mps_row_name(41), "R0000042");
}

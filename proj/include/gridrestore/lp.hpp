#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace gridrestore {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, equal, greater_equal };
enum class Sense { maximize, minimize };

struct Term {
  std::size_t var = 0;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

struct Objective {
  Sense sense = Sense::maximize;
  std::vector<Term> terms;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Solver-agnostic linear program with named variables.
class LinearProgram {
 public:
  std::size_t add_variable(std::string name, double lower = 0.0, double upper = kInf);
  std::size_t add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs);
  void set_objective(Sense sense, std::vector<Term> terms);

  void set_bounds(std::size_t var, double lower, double upper);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Objective& objective() const { return objective_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }

  /// Throws ModelError on NaN data, out-of-range indices, or crossed bounds.
  void validate() const;

  double objective_value(std::span<const double> x) const;
  /// Largest violation of any constraint row at `x`.
  double max_row_violation(std::span<const double> x) const;
  /// Largest violation of any variable bound at `x`.
  double max_bound_violation(std::span<const double> x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Objective objective_;
  std::unordered_set<std::string> names_;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double objective_value = 0.0;
  std::vector<double> primal;
  std::size_t iterations = 0;
};

struct LpTolerances {
  double feasibility = 1e-7;
  double optimality = 1e-7;
  double pivot = 1e-10;
};

struct LpOptions {
  std::size_t iteration_limit = 100000;
  /// Checked between pivots; an expired deadline yields iteration_limit.
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t degeneracy_threshold = 50;
  LpTolerances tolerances;
};

/// Bounded-variable two-phase primal simplex on a dense tableau.
///
/// Fixed variables are substituted out before the tableau is formed. Pricing
/// is Dantzig's rule until `degeneracy_threshold` consecutive degenerate
/// pivots occur, then Bland's rule until the next nondegenerate pivot.
/// Deterministic for identical input. Optimal solutions are clamped to their
/// bounds and re-verified against the original rows.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});
LpSolution solve_lp(const LinearProgram& lp, std::size_t iteration_limit);

}  // namespace gridrestore

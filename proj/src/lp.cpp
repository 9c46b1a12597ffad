#include "gridrestore/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gridrestore {

std::size_t LinearProgram::add_variable(std::string name, double lower, double upper) {
  if (!names_.insert(name).second) throw ModelError("duplicate variable name '" + name + "'");
  variables_.push_back({std::move(name), lower, upper});
  return variables_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Relation relation,
                                          double rhs) {
  constraints_.push_back({std::move(name), std::move(terms), relation, rhs});
  return constraints_.size() - 1;
}

void LinearProgram::set_objective(Sense sense, std::vector<Term> terms) {
  objective_ = {sense, std::move(terms)};
}

void LinearProgram::set_bounds(std::size_t var, double lower, double upper) {
  if (var >= variables_.size()) throw ModelError("variable index out of range");
  variables_[var].lower = lower;
  variables_[var].upper = upper;
}

void LinearProgram::validate() const {
  for (const auto& v : variables_) {
    if (std::isnan(v.lower) || std::isnan(v.upper)) throw ModelError("NaN bound on " + v.name);
    if (v.lower > v.upper) throw ModelError("crossed bounds on " + v.name);
    if (v.lower == kInf || v.upper == -kInf) throw ModelError("infinite bound on wrong side for " + v.name);
  }
  auto check_terms = [&](const std::vector<Term>& terms, const std::string& where) {
    for (const auto& t : terms) {
      if (t.var >= variables_.size()) throw ModelError("term index out of range in " + where);
      if (!std::isfinite(t.coef)) throw ModelError("non-finite coefficient in " + where);
    }
  };
  for (const auto& c : constraints_) {
    check_terms(c.terms, c.name);
    if (!std::isfinite(c.rhs)) throw ModelError("non-finite rhs in " + c.name);
  }
  check_terms(objective_.terms, "objective");
}

double LinearProgram::objective_value(std::span<const double> x) const {
  double value = 0.0;
  for (const auto& t : objective_.terms) value += t.coef * x[t.var];
  return value;
}

double LinearProgram::max_row_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (const auto& c : constraints_) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    double violation = 0.0;
    switch (c.relation) {
      case Relation::less_equal: violation = lhs - c.rhs; break;
      case Relation::greater_equal: violation = c.rhs - lhs; break;
      case Relation::equal: violation = std::abs(lhs - c.rhs); break;
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

double LinearProgram::max_bound_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, variables_[j].lower - x[j]);
    worst = std::max(worst, x[j] - variables_[j].upper);
  }
  return worst;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

enum class NonbasicState { basic, at_lower, at_upper, free_zero, fixed };

// Reduced problem after fixed variables are substituted out. Row i reads
// sum_j a_ij x_j + s_i = b_i with the slack bounds encoding the relation.
struct Reduced {
  std::vector<std::size_t> active;  // reduced column -> original variable
  std::vector<double> lower, upper, cost;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> rhs;
  std::vector<double> slack_lower, slack_upper;
  std::vector<double> fixed_values;  // original variables, valid where fixed
  bool trivially_infeasible = false;
};

Reduced reduce(const LinearProgram& lp, double feas_tol) {
  Reduced red;
  const auto& vars = lp.variables();
  std::vector<std::ptrdiff_t> col_of(vars.size(), -1);
  red.fixed_values.assign(vars.size(), 0.0);
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].lower == vars[j].upper) {
      red.fixed_values[j] = vars[j].lower;
    } else {
      col_of[j] = static_cast<std::ptrdiff_t>(red.active.size());
      red.active.push_back(j);
      red.lower.push_back(vars[j].lower);
      red.upper.push_back(vars[j].upper);
    }
  }
  red.cost.assign(red.active.size(), 0.0);
  const double sign = lp.objective().sense == Sense::maximize ? -1.0 : 1.0;
  for (const auto& t : lp.objective().terms) {
    if (col_of[t.var] >= 0) red.cost[static_cast<std::size_t>(col_of[t.var])] += sign * t.coef;
  }

  for (const auto& c : lp.constraints()) {
    std::map<std::size_t, double> merged;
    double rhs = c.rhs;
    for (const auto& t : c.terms) {
      if (col_of[t.var] >= 0)
        merged[static_cast<std::size_t>(col_of[t.var])] += t.coef;
      else
        rhs -= t.coef * red.fixed_values[t.var];
    }
    std::vector<std::pair<std::size_t, double>> row;
    for (const auto& [col, coef] : merged)
      if (coef != 0.0) row.emplace_back(col, coef);
    double slo = 0.0;
    double sup = 0.0;
    switch (c.relation) {
      case Relation::less_equal: sup = kInf; break;
      case Relation::greater_equal: slo = -kInf; break;
      case Relation::equal: break;
    }
    if (row.empty()) {
      // 0 + s = rhs must admit a slack inside its bounds
      if (rhs < slo - feas_tol || rhs > sup + feas_tol) red.trivially_infeasible = true;
      continue;
    }
    red.rows.push_back(std::move(row));
    red.rhs.push_back(rhs);
    red.slack_lower.push_back(slo);
    red.slack_upper.push_back(sup);
  }
  return red;
}

class DenseSimplex {
 public:
  DenseSimplex(const Reduced& red, const LpOptions& options)
      : red_(red),
        opt_(options),
        tol_(options.tolerances),
        n_(red.active.size()),
        m_(red.rows.size()),
        ncols_(n_ + m_),
        tab_(m_ * ncols_, 0.0),
        lower_(ncols_ + m_),
        upper_(ncols_ + m_),
        value_(ncols_, 0.0),
        state_(ncols_, NonbasicState::at_lower),
        basis_(m_),
        xb_(m_, 0.0),
        cost_(ncols_ + m_, 0.0),
        d_(ncols_, 0.0) {
    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = red.lower[j];
      upper_[j] = red.upper[j];
      cost_[j] = red.cost[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      lower_[n_ + i] = red.slack_lower[i];
      upper_[n_ + i] = red.slack_upper[i];
      lower_[ncols_ + i] = 0.0;
      upper_[ncols_ + i] = kInf;
    }
  }

  LpStatus run(std::size_t& iterations) {
    initialize();
    LpStatus status = phase(/*phase_one=*/true, iterations);
    if (status == LpStatus::iteration_limit) return status;
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (is_artificial(basis_[i])) infeasibility = std::max(infeasibility, xb_[i]);
    if (infeasibility > tol_.feasibility) return LpStatus::infeasible;

    for (std::size_t i = 0; i < m_; ++i) upper_[ncols_ + i] = 0.0;
    drive_out_artificials();
    set_phase_costs(false);
    return phase(false, iterations);
  }

  // Values of the reduced structural columns.
  std::vector<double> structural_values() const {
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = value_[j];
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = xb_[i];
    return x;
  }

  // Recomputes basic values from the original data by dense elimination.
  std::vector<double> refined_structural_values() const {
    std::vector<double> mat(m_ * m_, 0.0);
    std::vector<double> rhs(red_.rhs);
    for (std::size_t i = 0; i < m_; ++i) {
      for (const auto& [col, coef] : red_.rows[i]) {
        if (state_[col] != NonbasicState::basic) rhs[i] -= coef * value_[col];
      }
      const std::size_t s = n_ + i;
      if (state_[s] != NonbasicState::basic) rhs[i] -= value_[s];
    }
    // Column r of the basis matrix holds the original column of basis_[r].
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t col = basis_[r];
      if (col < n_) {
        for (std::size_t i = 0; i < m_; ++i)
          for (const auto& [c, coef] : red_.rows[i])
            if (c == col) mat[i * m_ + r] = coef;
      } else if (col < ncols_) {
        mat[(col - n_) * m_ + r] = 1.0;
      } else {
        mat[(col - ncols_) * m_ + r] = art_sign_[col - ncols_];
      }
    }
    std::vector<std::size_t> perm(m_);
    for (std::size_t i = 0; i < m_; ++i) perm[i] = i;
    std::vector<double> sol(m_, 0.0);
    bool singular = false;
    for (std::size_t k = 0; k < m_ && !singular; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < m_; ++i)
        if (std::abs(mat[i * m_ + k]) > std::abs(mat[piv * m_ + k])) piv = i;
      if (std::abs(mat[piv * m_ + k]) < 1e-14) {
        singular = true;
        break;
      }
      if (piv != k) {
        for (std::size_t c = 0; c < m_; ++c) std::swap(mat[k * m_ + c], mat[piv * m_ + c]);
        std::swap(rhs[k], rhs[piv]);
      }
      for (std::size_t i = k + 1; i < m_; ++i) {
        const double f = mat[i * m_ + k] / mat[k * m_ + k];
        if (f == 0.0) continue;
        for (std::size_t c = k; c < m_; ++c) mat[i * m_ + c] -= f * mat[k * m_ + c];
        rhs[i] -= f * rhs[k];
      }
    }
    std::vector<double> x = structural_values();
    if (singular) return x;
    for (std::size_t k = m_; k-- > 0;) {
      double s = rhs[k];
      for (std::size_t c = k + 1; c < m_; ++c) s -= mat[k * m_ + c] * sol[c];
      sol[k] = s / mat[k * m_ + k];
    }
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) x[basis_[r]] = sol[r];
    return x;
  }

 private:
  bool is_artificial(std::size_t col) const { return col >= ncols_; }
  double& at(std::size_t i, std::size_t j) { return tab_[i * ncols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tab_[i * ncols_ + j]; }

  void initialize() {
    for (std::size_t j = 0; j < n_; ++j) {
      if (lower_[j] == upper_[j]) {
        state_[j] = NonbasicState::fixed;
        value_[j] = lower_[j];
      } else if (std::isfinite(lower_[j])) {
        state_[j] = NonbasicState::at_lower;
        value_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = NonbasicState::at_upper;
        value_[j] = upper_[j];
      } else {
        state_[j] = NonbasicState::free_zero;
        value_[j] = 0.0;
      }
    }
    art_sign_.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double residual = red_.rhs[i];
      for (const auto& [col, coef] : red_.rows[i]) {
        at(i, col) = coef;
        residual -= coef * value_[col];
      }
      const std::size_t s = n_ + i;
      at(i, s) = 1.0;
      if (residual >= lower_[s] && residual <= upper_[s]) {
        basis_[i] = s;
        state_[s] = NonbasicState::basic;
        xb_[i] = residual;
      } else {
        state_[s] = lower_[s] == upper_[s] ? NonbasicState::fixed
                    : std::isfinite(lower_[s]) ? NonbasicState::at_lower
                                               : NonbasicState::at_upper;
        value_[s] = 0.0;
        const double sigma = residual >= 0.0 ? 1.0 : -1.0;
        art_sign_[i] = sigma;
        if (sigma < 0.0)
          for (std::size_t j = 0; j < ncols_; ++j) at(i, j) = -at(i, j);
        basis_[i] = ncols_ + i;
        xb_[i] = std::abs(residual);
      }
    }
    set_phase_costs(true);
  }

  void set_phase_costs(bool phase_one) {
    std::vector<double> basic_cost(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t col = basis_[i];
      if (phase_one)
        basic_cost[i] = is_artificial(col) ? 1.0 : 0.0;
      else
        basic_cost[i] = is_artificial(col) ? 0.0 : cost_[col];
    }
    for (std::size_t j = 0; j < ncols_; ++j) d_[j] = phase_one ? 0.0 : cost_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      if (basic_cost[i] == 0.0) continue;
      const double* row = &tab_[i * ncols_];
      for (std::size_t j = 0; j < ncols_; ++j)
        if (row[j] != 0.0) d_[j] -= basic_cost[i] * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (!is_artificial(basis_[i])) d_[basis_[i]] = 0.0;
  }

  // Returns the entering column and its direction, or npos when optimal.
  std::pair<std::size_t, double> price(bool bland) const {
    std::size_t best = npos;
    double best_score = 0.0;
    double best_dir = 0.0;
    for (std::size_t j = 0; j < ncols_; ++j) {
      double dir = 0.0;
      switch (state_[j]) {
        case NonbasicState::at_lower:
          if (d_[j] < -tol_.optimality) dir = 1.0;
          break;
        case NonbasicState::at_upper:
          if (d_[j] > tol_.optimality) dir = -1.0;
          break;
        case NonbasicState::free_zero:
          if (std::abs(d_[j]) > tol_.optimality) dir = d_[j] < 0.0 ? 1.0 : -1.0;
          break;
        default: break;
      }
      if (dir == 0.0) continue;
      if (bland) return {j, dir};
      const double score = std::abs(d_[j]);
      if (score > best_score) {
        best = j;
        best_score = score;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  struct RatioResult {
    std::size_t row = npos;
    double step = kInf;
    bool flip = false;
  };

  RatioResult ratio_test(std::size_t q, double dir, bool bland) const {
    RatioResult result;
    const double flip_len = upper_[q] - lower_[q];
    auto limit_of = [&](std::size_t i, double alpha, double slack) -> double {
      const std::size_t col = basis_[i];
      if (alpha > 0.0) {
        const double lo = lower_[col];
        return std::isfinite(lo) ? (xb_[i] - lo + slack) / alpha : kInf;
      }
      const double up = upper_[col];
      return std::isfinite(up) ? (up - xb_[i] + slack) / -alpha : kInf;
    };

    if (bland) {
      // Strict minimum ratio, ties to the lowest basic column index.
      double best = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, q) * dir;
        if (std::abs(alpha) <= tol_.pivot) continue;
        const double ratio = std::max(0.0, limit_of(i, alpha, 0.0));
        if (ratio == kInf) continue;
        if (result.row == npos || ratio < best - 1e-12) {
          best = ratio;
          result.row = i;
        } else if (ratio <= best + 1e-12 && basis_[i] < basis_[result.row]) {
          best = std::min(best, ratio);
          result.row = i;
        }
      }
      result.step = best;
    } else {
      // Harris two-pass test: bound the step with relaxed limits, then take
      // the largest pivot among rows that block within that bound.
      double relaxed = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = at(i, q) * dir;
        if (std::abs(alpha) <= tol_.pivot) continue;
        relaxed = std::min(relaxed, limit_of(i, alpha, tol_.feasibility));
      }
      if (relaxed < kInf) {
        double best_alpha = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
          const double alpha = at(i, q) * dir;
          if (std::abs(alpha) <= tol_.pivot) continue;
          if (limit_of(i, alpha, 0.0) <= relaxed && std::abs(alpha) > best_alpha) {
            best_alpha = std::abs(alpha);
            result.row = i;
          }
        }
        if (result.row != npos)
          result.step = std::max(0.0, limit_of(result.row, at(result.row, q) * dir, 0.0));
      }
    }
    if (std::isfinite(flip_len) && flip_len <= result.step) {
      result.flip = true;
      result.step = flip_len;
      result.row = npos;
    }
    return result;
  }

  void move_basics(std::size_t q, double delta) {
    if (delta == 0.0) return;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, q);
      if (a != 0.0) xb_[i] -= a * delta;
    }
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &tab_[r * ncols_];
    const double piv = prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] /= piv;
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * ncols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    const double dq = d_[q];
    if (dq != 0.0) {
      for (std::size_t j : nz_) d_[j] -= dq * prow[j];
      d_[q] = 0.0;
    }
  }

  LpStatus phase(bool phase_one, std::size_t& iterations) {
    std::size_t degenerate_run = 0;
    while (true) {
      if (iterations >= opt_.iteration_limit) return LpStatus::iteration_limit;
      if (opt_.deadline && std::chrono::steady_clock::now() >= *opt_.deadline)
        return LpStatus::iteration_limit;
      const bool bland = degenerate_run >= opt_.degeneracy_threshold;
      const auto [q, dir] = price(bland);
      if (q == npos) return LpStatus::optimal;
      const RatioResult rr = ratio_test(q, dir, bland);
      ++iterations;
      if (rr.row == npos && !rr.flip) {
        if (phase_one) return LpStatus::iteration_limit;  // cannot happen in exact arithmetic
        return LpStatus::unbounded;
      }
      degenerate_run = rr.step <= 1e-12 ? degenerate_run + 1 : 0;
      move_basics(q, dir * rr.step);
      if (rr.flip) {
        if (dir > 0.0) {
          value_[q] = upper_[q];
          state_[q] = NonbasicState::at_upper;
        } else {
          value_[q] = lower_[q];
          state_[q] = NonbasicState::at_lower;
        }
        continue;
      }
      const std::size_t r = rr.row;
      const std::size_t leaving = basis_[r];
      const double entering_value = value_[q] + dir * rr.step;
      const bool to_lower = at(r, q) * dir > 0.0;
      if (!is_artificial(leaving)) {
        if (lower_[leaving] == upper_[leaving]) {
          state_[leaving] = NonbasicState::fixed;
          value_[leaving] = lower_[leaving];
        } else if (to_lower) {
          state_[leaving] = NonbasicState::at_lower;
          value_[leaving] = lower_[leaving];
        } else {
          state_[leaving] = NonbasicState::at_upper;
          value_[leaving] = upper_[leaving];
        }
      }
      pivot(r, q);
      basis_[r] = q;
      state_[q] = NonbasicState::basic;
      xb_[r] = entering_value;
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      std::size_t best = npos;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (state_[j] == NonbasicState::basic) continue;
        if (std::abs(at(r, j)) > best_abs) {
          best_abs = std::abs(at(r, j));
          best = j;
        }
      }
      if (best == npos) continue;  // redundant row; artificial stays at zero
      const double delta = xb_[r] / at(r, best);
      move_basics(best, delta);
      const double entering_value = value_[best] + delta;
      pivot(r, best);
      basis_[r] = best;
      state_[best] = NonbasicState::basic;
      xb_[r] = entering_value;
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const Reduced& red_;
  const LpOptions& opt_;
  const LpTolerances& tol_;
  std::size_t n_;
  std::size_t m_;
  std::size_t ncols_;
  std::vector<double> tab_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> value_;
  std::vector<NonbasicState> state_;
  std::vector<std::size_t> basis_;
  std::vector<double> xb_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<double> art_sign_;
  std::vector<std::size_t> nz_;
};

std::vector<double> expand(const LinearProgram& lp, const Reduced& red, const std::vector<double>& x) {
  std::vector<double> full = red.fixed_values;
  for (std::size_t c = 0; c < red.active.size(); ++c) full[red.active[c]] = x[c];
  const auto& vars = lp.variables();
  for (std::size_t j = 0; j < full.size(); ++j) full[j] = std::clamp(full[j], vars[j].lower, vars[j].upper);
  return full;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  LpSolution solution;
  const Reduced red = reduce(lp, options.tolerances.feasibility);
  if (red.trivially_infeasible) {
    solution.status = LpStatus::infeasible;
    return solution;
  }
  DenseSimplex simplex(red, options);
  solution.status = simplex.run(solution.iterations);
  if (solution.status == LpStatus::infeasible || solution.status == LpStatus::unbounded) return solution;

  solution.primal = expand(lp, red, simplex.structural_values());
  if (solution.status == LpStatus::optimal &&
      lp.max_row_violation(solution.primal) > options.tolerances.feasibility) {
    auto refined = expand(lp, red, simplex.refined_structural_values());
    if (lp.max_row_violation(refined) < lp.max_row_violation(solution.primal)) solution.primal = std::move(refined);
  }
  solution.objective_value = lp.objective_value(solution.primal);
  return solution;
}

LpSolution solve_lp(const LinearProgram& lp, std::size_t iteration_limit) {
  LpOptions options;
  options.iteration_limit = iteration_limit;
  return solve_lp(lp, options);
}

}  // namespace gridrestore

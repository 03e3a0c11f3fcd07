#pragma once

// Dense-tableau bounded-variable primal simplex (two phases).
//
// Variable bounds are handled implicitly: nonbasic columns sit at their lower
// or upper bound and the ratio test includes bound flips, so only the linear
// rows occupy the tableau. Pricing is Dantzig's largest reduced cost; after a
// run of degenerate pivots the solver switches to Bland's smallest-index rule
// until progress resumes, which rules out cycling.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "milp.hpp"

namespace nexusplan {

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const MilpProblem& p, std::span<const double> lower,
                 std::span<const double> upper, const SolverOptions& opt)
      : problem_(p), opt_(opt) {
    build(lower, upper);
  }

  SolveResult solve() {
    SolveResult res;
    if (bounds_conflict_) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    if (num_art_ > 0) {
      set_phase_costs(/*phase_one=*/true);
      const auto st = iterate(/*phase_one=*/true);
      res.pivots = pivots_;
      if (st == SolveStatus::IterationLimit) {
        res.status = st;
        return res;
      }
      if (phase_objective() > opt_.tol.feasibility) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      retire_artificials();
    }
    set_phase_costs(/*phase_one=*/false);
    const auto st = iterate(/*phase_one=*/false);
    res.pivots = pivots_;
    res.status = st;
    if (st != SolveStatus::Optimal) return res;

    res.assignment = extract();
    res.objective = problem_.evaluate_objective(res.assignment);
    return res;
  }

 private:
  enum class ColKind { Shifted, Negated, SplitPos, SplitNeg };
  struct ColMap {
    std::size_t var;
    ColKind kind;
    double offset;  // lower (Shifted) or upper (Negated)
  };

  double& at(std::size_t i, std::size_t j) { return tab_[i * ncols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tab_[i * ncols_ + j]; }

  void build(std::span<const double> lower, std::span<const double> upper) {
    const auto& vars = problem_.variables();
    const std::size_t n = vars.size();
    var_first_col_.assign(n, 0);
    // structural columns
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = lower[j], hi = upper[j];
      if (lo > hi) bounds_conflict_ = true;
      var_first_col_[j] = colmap_.size();
      if (std::isfinite(lo)) {
        colmap_.push_back({j, ColKind::Shifted, lo});
        ub_.push_back(hi - lo);
      } else if (std::isfinite(hi)) {
        colmap_.push_back({j, ColKind::Negated, hi});
        ub_.push_back(kInfinity);
      } else {
        colmap_.push_back({j, ColKind::SplitPos, 0.0});
        ub_.push_back(kInfinity);
        colmap_.push_back({j, ColKind::SplitNeg, 0.0});
        ub_.push_back(kInfinity);
      }
    }
    num_struct_ = colmap_.size();

    const auto& rows = problem_.constraints();
    m_ = rows.size();
    std::vector<double> rhs(m_);
    std::vector<double> row_sign(m_, 1.0);
    std::vector<int> slack_sign(m_, 0);  // coefficient of the row's slack after sign fix
    std::size_t num_slack = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      double b = rows[i].rhs;
      for (const auto& t : rows[i].terms) {
        const auto& cm = colmap_[var_first_col_[t.var.index]];
        if (cm.kind == ColKind::Shifted || cm.kind == ColKind::Negated) b -= t.coef * cm.offset;
      }
      if (b < 0) row_sign[i] = -1.0;
      rhs[i] = b * row_sign[i];
      if (rows[i].sense == RowSense::LE) slack_sign[i] = static_cast<int>(row_sign[i]);
      if (rows[i].sense == RowSense::GE) slack_sign[i] = -static_cast<int>(row_sign[i]);
      num_slack += rows[i].sense != RowSense::EQ;
    }
    num_art_ = 0;
    for (std::size_t i = 0; i < m_; ++i) num_art_ += slack_sign[i] != 1;
    ncols_ = num_struct_ + num_slack + num_art_;
    active_cols_ = ncols_;
    tab_.assign(m_ * ncols_, 0.0);
    ub_.resize(ncols_, kInfinity);
    basis_.assign(m_, 0);
    beta_.assign(m_, 0.0);
    at_upper_.assign(ncols_, false);
    is_basic_.assign(ncols_, false);

    std::size_t slack_col = num_struct_;
    std::size_t art_col = num_struct_ + num_slack;
    art_begin_ = art_col;
    for (std::size_t i = 0; i < m_; ++i) {
      for (const auto& t : rows[i].terms) {
        const std::size_t c = var_first_col_[t.var.index];
        const double a = t.coef * row_sign[i];
        switch (colmap_[c].kind) {
          case ColKind::Shifted: at(i, c) += a; break;
          case ColKind::Negated: at(i, c) -= a; break;
          case ColKind::SplitPos:
            at(i, c) += a;
            at(i, c + 1) -= a;
            break;
          case ColKind::SplitNeg: break;
        }
      }
      if (rows[i].sense != RowSense::EQ) {
        at(i, slack_col) = slack_sign[i];
        if (slack_sign[i] == 1) set_basic(i, slack_col);
        ++slack_col;
      }
      if (slack_sign[i] != 1) {
        at(i, art_col) = 1.0;
        set_basic(i, art_col);
        ++art_col;
      }
      beta_[i] = rhs[i];
    }
  }

  void set_basic(std::size_t row, std::size_t col) {
    basis_[row] = col;
    is_basic_[col] = true;
  }

  void set_phase_costs(bool phase_one) {
    cost_.assign(ncols_, 0.0);
    if (phase_one) {
      for (std::size_t c = art_begin_; c < ncols_; ++c) cost_[c] = 1.0;
    } else {
      const auto& obj = problem_.objective();
      for (std::size_t c = 0; c < num_struct_; ++c) {
        const double cj = obj[colmap_[c].var];
        cost_[c] = (colmap_[c].kind == ColKind::Negated || colmap_[c].kind == ColKind::SplitNeg)
                       ? -cj
                       : cj;
      }
    }
    // reduced costs d_j = c_j - c_B^T T_j
    d_.assign(active_cols_, 0.0);
    for (std::size_t j = 0; j < active_cols_; ++j) d_[j] = cost_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * ncols_];
      for (std::size_t j = 0; j < active_cols_; ++j) d_[j] -= cb * row[j];
    }
  }

  double phase_objective() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += cost_[basis_[i]] * beta_[i];
    for (std::size_t j = 0; j < active_cols_; ++j)
      if (!is_basic_[j] && at_upper_[j]) s += cost_[j] * ub_[j];
    return s;
  }

  bool eligible(std::size_t j, bool phase_one) const {
    if (is_basic_[j] || ub_[j] <= 0.0) return false;
    if (!phase_one && j >= art_begin_) return false;
    const double tol = opt_.tol.optimality;
    return at_upper_[j] ? d_[j] > tol : d_[j] < -tol;
  }

  SolveStatus iterate(bool phase_one) {
    std::size_t degenerate_run = 0;
    bool bland = false;
    const double piv_tol = opt_.tol.pivot;
    for (;;) {
      // pricing
      std::size_t q = ncols_;
      double best = 0.0;
      for (std::size_t j = 0; j < active_cols_; ++j) {
        if (!eligible(j, phase_one)) continue;
        if (bland) {
          q = j;
          break;
        }
        const double score = std::abs(d_[j]);
        if (score > best) {
          best = score;
          q = j;
        }
      }
      if (q == ncols_) return SolveStatus::Optimal;
      if (pivots_ >= opt_.max_pivots) return SolveStatus::IterationLimit;
      ++pivots_;

      const double dir = at_upper_[q] ? -1.0 : 1.0;
      // ratio test
      double theta = kInfinity;
      std::size_t leave = m_;
      double leave_alpha = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = dir * at(i, q);
        double limit;
        if (alpha > piv_tol) {
          limit = std::max(beta_[i], 0.0) / alpha;
        } else if (alpha < -piv_tol && std::isfinite(ub_[basis_[i]])) {
          limit = std::max(ub_[basis_[i]] - beta_[i], 0.0) / -alpha;
        } else {
          continue;
        }
        bool take = false;
        if (leave == m_ || limit < theta - 1e-12) {
          take = true;
        } else if (limit <= theta + 1e-12) {
          take = bland ? basis_[i] < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          theta = std::min(theta, limit);
          leave = i;
          leave_alpha = alpha;
        }
      }

      const bool flip = std::isfinite(ub_[q]) && ub_[q] <= theta;
      if (!flip && leave == m_) {
        // phase one is bounded below by zero, so this only happens in phase two
        return SolveStatus::Unbounded;
      }
      const double step = flip ? ub_[q] : theta;
      if (step > 1e-12) {
        degenerate_run = 0;
        bland = false;
      } else if (++degenerate_run > 50) {
        bland = true;
      }

      if (step != 0.0) {
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = at(i, q);
          if (a != 0.0) beta_[i] -= dir * a * step;
        }
      }
      if (flip) {
        at_upper_[q] = !at_upper_[q];
        continue;
      }
      const double entering_value = at_upper_[q] ? ub_[q] - step : step;
      const std::size_t out = basis_[leave];
      at_upper_[out] = leave_alpha < 0.0;  // left at its upper bound
      is_basic_[out] = false;
      at_upper_[q] = false;
      pivot(leave, q);
      set_basic(leave, q);
      beta_[leave] = entering_value;
    }
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &tab_[r * ncols_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < active_cols_; ++j) {
      if (prow[j] == 0.0) continue;
      prow[j] *= inv;
      if (std::abs(prow[j]) < 1e-14) {
        prow[j] = 0.0;
        continue;
      }
      nz_.push_back(j);
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * ncols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (const std::size_t j : nz_) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    const double fd = d_[q];
    if (fd != 0.0) {
      for (const std::size_t j : nz_) d_[j] -= fd * prow[j];
      d_[q] = 0.0;
    }
  }

  // After a feasible phase one: pivot basic artificials out where possible,
  // pin the rest at zero and drop artificial columns from further pricing.
  void retire_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < art_begin_) continue;
      beta_[r] = 0.0;
      std::size_t best = ncols_;
      double best_mag = 1e-7;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (is_basic_[j]) continue;
        const double mag = std::abs(at(r, j));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best == ncols_) continue;  // redundant row
      const std::size_t out = basis_[r];
      const double value = at_upper_[best] ? ub_[best] : 0.0;
      is_basic_[out] = false;
      at_upper_[out] = false;
      at_upper_[best] = false;
      pivot(r, best);
      set_basic(r, best);
      beta_[r] = value;
    }
    for (std::size_t c = art_begin_; c < ncols_; ++c) ub_[c] = 0.0;
    active_cols_ = art_begin_;
  }

  std::vector<double> extract() const {
    std::vector<double> colval(ncols_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j)
      if (!is_basic_[j] && at_upper_[j]) colval[j] = ub_[j];
    for (std::size_t i = 0; i < m_; ++i) colval[basis_[i]] = beta_[i];
    std::vector<double> x(problem_.num_variables(), 0.0);
    for (std::size_t c = 0; c < num_struct_; ++c) {
      const auto& cm = colmap_[c];
      switch (cm.kind) {
        case ColKind::Shifted: x[cm.var] = cm.offset + colval[c]; break;
        case ColKind::Negated: x[cm.var] = cm.offset - colval[c]; break;
        case ColKind::SplitPos: x[cm.var] += colval[c]; break;
        case ColKind::SplitNeg: x[cm.var] -= colval[c]; break;
      }
    }
    return x;
  }

  const MilpProblem& problem_;
  const SolverOptions& opt_;

  std::vector<ColMap> colmap_;
  std::vector<std::size_t> var_first_col_;
  std::size_t num_struct_ = 0, num_art_ = 0, art_begin_ = 0;
  std::size_t m_ = 0, ncols_ = 0, active_cols_ = 0;
  std::vector<double> tab_;
  std::vector<double> ub_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<double> beta_;
  std::vector<std::size_t> basis_;
  std::vector<bool> at_upper_;
  std::vector<bool> is_basic_;
  std::vector<std::size_t> nz_;
  std::size_t pivots_ = 0;
  bool bounds_conflict_ = false;
};

inline std::vector<double> lower_bounds(const MilpProblem& p) {
  std::vector<double> v;
  v.reserve(p.num_variables());
  for (const auto& var : p.variables()) v.push_back(var.lower);
  return v;
}

inline std::vector<double> upper_bounds(const MilpProblem& p) {
  std::vector<double> v;
  v.reserve(p.num_variables());
  for (const auto& var : p.variables()) v.push_back(var.upper);
  return v;
}

}  // namespace detail

/// LP relaxation solve with explicit per-variable bounds (integrality ignored).
inline SolveResult solve_lp(const MilpProblem& problem, std::span<const double> lower,
                            std::span<const double> upper, const SolverOptions& opt = {}) {
  assert(lower.size() == problem.num_variables() && upper.size() == problem.num_variables());
  detail::BoundedSimplex lp(problem, lower, upper, opt);
  return lp.solve();
}

/// Solves the LP relaxation of `problem` (binaries treated as [0,1]).
inline SolveResult solve_lp(const MilpProblem& problem, const SolverOptions& opt = {}) {
  const auto lo = detail::lower_bounds(problem);
  const auto hi = detail::upper_bounds(problem);
  return solve_lp(problem, lo, hi, opt);
}

}  // namespace nexusplan

#pragma once

// Budget-of-uncertainty robust counterpart for rows whose coefficients vary
// in symmetric intervals [nominal - deviation, nominal + deviation].
//
// For an affected row i with uncertain entries J_i and protection level
// G_i = gamma * |J_i|, the worst case over at most G_i deviating entries is
// dualised into
//
//   a_i x + G_i z_i + sum_j p_ij  <= b_i      (LE; subtracted for GE rows)
//   z_i + p_ij >= dev_ij |x_j|,   z_i, p_ij >= 0.

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "milp.hpp"

namespace nexusplan {

struct UncertainCoefficient {
  std::string row;
  VarId var;
  double nominal = 0.0;
  double deviation = 0.0;
};

/// Normalised budget gamma in [0,1]; row i is protected against
/// gamma * |J_i| simultaneous deviations (fractional values allowed).
class RobustBudget {
 public:
  constexpr RobustBudget() = default;
  explicit RobustBudget(double gamma) : gamma_(gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw std::invalid_argument("robust budget must lie in [0,1], got " + std::to_string(gamma));
  }
  constexpr double value() const { return gamma_; }

 private:
  double gamma_ = 0.0;
};

struct RobustOptions {
  // A row with a single uncertain entry on a sign-restricted variable has
  // protection exactly G_i * dev * |x| (G_i <= 1), so its coefficient can be
  // shifted in place instead of adding auxiliaries.
  bool compact_single_entry_rows = true;
};

class RobustModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Returns the robust counterpart of `problem`. Coefficients named in
/// `uncertain` are reset to their nominal values before protection is added.
inline MilpProblem robustify(const MilpProblem& problem, std::span<const UncertainCoefficient> uncertain,
                             RobustBudget budget, const RobustOptions& options = {}) {
  MilpProblem out = problem;
  if (uncertain.empty()) return out;

  std::unordered_map<std::string, std::size_t> row_index;
  std::unordered_map<std::string, int> label_count;
  for (std::size_t i = 0; i < problem.num_constraints(); ++i) {
    row_index.emplace(problem.constraints()[i].label, i);
    ++label_count[problem.constraints()[i].label];
  }

  // std::map keeps the auxiliary variable order independent of hashing
  std::map<std::size_t, std::vector<const UncertainCoefficient*>> by_row;
  for (const auto& u : uncertain) {
    const auto it = row_index.find(u.row);
    if (it == row_index.end()) throw RobustModelError("uncertain coefficient on unknown row '" + u.row + "'");
    if (label_count[u.row] > 1) throw RobustModelError("row label '" + u.row + "' is ambiguous");
    if (u.var.index >= problem.num_variables()) throw RobustModelError("unknown variable in row '" + u.row + "'");
    if (!(u.deviation >= 0.0) || !std::isfinite(u.deviation) || !std::isfinite(u.nominal))
      throw RobustModelError("invalid deviation in row '" + u.row + "'");
    auto& entries = by_row[it->second];
    for (const auto* e : entries)
      if (e->var == u.var)
        throw RobustModelError("duplicate uncertain entry in row '" + u.row + "'");
    entries.push_back(&u);
  }

  for (const auto& [ri, entries] : by_row) {
    const LinearConstraint row = out.constraints()[ri];
    if (row.sense == RowSense::EQ)
      throw RobustModelError("row '" + row.label + "' is an equality; uncertainty needs an inequality");
    const double side = row.sense == RowSense::LE ? 1.0 : -1.0;  // protection sign in the row
    const double protection = budget.value() * static_cast<double>(entries.size());

    // signs[k]: +1 if x >= 0, -1 if x <= 0, 0 if mixed-sign (needs |x| auxiliary)
    std::vector<int> signs;
    for (const auto* e : entries) {
      const auto& v = problem.variable(e->var);
      if (v.lower >= 0.0) {
        signs.push_back(1);
      } else if (v.upper <= 0.0) {
        signs.push_back(-1);
      } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
        throw RobustModelError("free variable '" + v.name + "' in uncertain row '" + row.label +
                               "'; bound it first");
      } else {
        signs.push_back(0);
      }
    }

    auto& mrow = out.mutable_constraints()[ri];
    const auto set_coef = [&](VarId v, double c) {
      for (auto& t : mrow.terms)
        if (t.var == v) {
          t.coef = c;
          return;
        }
      mrow.terms.push_back({v, c});
    };
    for (const auto* e : entries) set_coef(e->var, e->nominal);

    if (options.compact_single_entry_rows && entries.size() == 1 && signs[0] != 0) {
      const auto* e = entries[0];
      set_coef(e->var, e->nominal + side * protection * e->deviation * signs[0]);
      continue;
    }

    const VarId z = out.add_variable("rob_z[" + row.label + "]", 0.0, kInfinity);
    std::vector<Term> extra{{z, side * protection}};
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto* e = entries[k];
      const std::string tag = row.label + "," + problem.variable(e->var).name;
      const VarId p = out.add_variable("rob_p[" + tag + "]", 0.0, kInfinity);
      extra.push_back({p, side});
      std::vector<Term> link{{z, 1.0}, {p, 1.0}};
      if (signs[k] != 0) {
        link.push_back({e->var, -e->deviation * signs[k]});
      } else {
        const VarId a = out.add_variable("rob_abs[" + tag + "]", 0.0, kInfinity);
        out.add_constraint({{a, 1.0}, {e->var, -1.0}}, RowSense::GE, 0.0, "rob_abs_pos[" + tag + "]");
        out.add_constraint({{a, 1.0}, {e->var, 1.0}}, RowSense::GE, 0.0, "rob_abs_neg[" + tag + "]");
        link.push_back({a, -e->deviation});
      }
      out.add_constraint(std::move(link), RowSense::GE, 0.0, "rob_link[" + tag + "]");
    }
    // add_constraint may have reallocated the row storage
    auto& target = out.mutable_constraints()[ri];
    for (const auto& t : extra) target.terms.push_back(t);
  }
  return out;
}

}  // namespace nexusplan

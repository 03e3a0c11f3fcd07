#pragma once

// Generic minimisation MILP model, solve results and an independent
// feasibility checker.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nexusplan {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Opaque variable handle; index into MilpProblem::variables().
struct VarId {
  std::size_t index = 0;
  friend bool operator==(VarId, VarId) = default;
  friend auto operator<=>(VarId, VarId) = default;
};

enum class VarKind { Continuous, Binary };
enum class RowSense { LE, GE, EQ };

struct VariableDef {
  VarId id;
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  VarKind kind = VarKind::Continuous;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct LinearConstraint {
  std::vector<Term> terms;
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
  std::string label;
};

/// Numerical tolerances shared by the solvers and the checker.
struct Tolerances {
  double feasibility = 1e-7;
  double integrality = 1e-6;
  double objective = 1e-9;
  double pivot = 1e-9;
  double optimality = 1e-9;
};

struct SolverOptions {
  Tolerances tol;
  std::size_t max_pivots = 50'000;
  std::size_t max_nodes = 100'000;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<double> objective;  // present iff Optimal
  std::vector<double> assignment;   // indexed by VarId::index
  std::size_t pivots = 0;
  std::size_t nodes = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
  double value(VarId v) const { return assignment.at(v.index); }
};

/// Minimisation MILP. Rows reference variables by id; duplicate variables
/// within a row are merged on insertion.
class MilpProblem {
 public:
  VarId add_variable(std::string name, double lower, double upper,
                     VarKind kind = VarKind::Continuous) {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
      throw std::invalid_argument("variable '" + name + "': lower > upper");
    if (kind == VarKind::Binary) {
      lower = std::max(lower, 0.0);
      upper = std::min(upper, 1.0);
      if (lower > upper)
        throw std::invalid_argument("binary '" + name + "' has empty [0,1] range");
    }
    VarId id{variables_.size()};
    variables_.push_back({id, std::move(name), lower, upper, kind});
    objective_.push_back(0.0);
    return id;
  }

  VarId add_binary(std::string name) { return add_variable(std::move(name), 0, 1, VarKind::Binary); }

  std::size_t add_constraint(std::vector<Term> terms, RowSense sense, double rhs,
                             std::string label) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("row '" + label + "': non-finite rhs");
    LinearConstraint row{{}, sense, rhs, std::move(label)};
    row.terms.reserve(terms.size());
    for (const auto& t : terms) {
      check_var(t.var);
      if (!std::isfinite(t.coef))
        throw std::invalid_argument("row '" + row.label + "': non-finite coefficient");
      bool merged = false;
      for (auto& existing : row.terms) {
        if (existing.var == t.var) {
          existing.coef += t.coef;
          merged = true;
          break;
        }
      }
      if (!merged) row.terms.push_back(t);
    }
    constraints_.push_back(std::move(row));
    return constraints_.size() - 1;
  }

  void set_cost(VarId v, double c) {
    check_var(v);
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
    objective_[v.index] = c;
  }
  void add_cost(VarId v, double c) { set_cost(v, objective_.at(v.index) + c); }

  void set_bounds(VarId v, double lower, double upper) {
    check_var(v);
    if (lower > upper) throw std::invalid_argument("set_bounds: lower > upper");
    variables_[v.index].lower = lower;
    variables_[v.index].upper = upper;
  }

  const std::vector<VariableDef>& variables() const { return variables_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  std::vector<LinearConstraint>& mutable_constraints() { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }
  const VariableDef& variable(VarId v) const { return variables_.at(v.index); }

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  std::size_t num_binaries() const {
    std::size_t n = 0;
    for (const auto& v : variables_) n += v.kind == VarKind::Binary;
    return n;
  }

  /// Row index by label, or nullopt. Linear scan; callers needing many
  /// lookups should build their own index.
  std::optional<std::size_t> find_row(std::string_view label) const {
    for (std::size_t i = 0; i < constraints_.size(); ++i)
      if (constraints_[i].label == label) return i;
    return std::nullopt;
  }

  std::optional<VarId> find_variable(std::string_view name) const {
    for (const auto& v : variables_)
      if (v.name == name) return v.id;
    return std::nullopt;
  }

  double evaluate_objective(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < objective_.size(); ++j) s += objective_[j] * x.at(j);
    return s;
  }

  /// Same model with every binary relaxed to a continuous [0,1] variable.
  MilpProblem relaxed() const {
    MilpProblem copy = *this;
    for (auto& v : copy.variables_) v.kind = VarKind::Continuous;
    return copy;
  }

 private:
  void check_var(VarId v) const {
    if (v.index >= variables_.size()) throw std::out_of_range("unknown variable id");
  }

  std::vector<VariableDef> variables_;
  std::vector<LinearConstraint> constraints_;
  std::vector<double> objective_;
};

/// Signed residual of a row at x: positive means violated by that amount.
inline double row_violation(const LinearConstraint& row, const std::vector<double>& x) {
  double lhs = 0.0;
  for (const auto& t : row.terms) lhs += t.coef * x.at(t.var.index);
  switch (row.sense) {
    case RowSense::LE: return lhs - row.rhs;
    case RowSense::GE: return row.rhs - lhs;
    case RowSense::EQ: return std::abs(lhs - row.rhs);
  }
  return 0.0;
}

struct FeasibilityReport {
  double max_row_violation = 0.0;
  double max_bound_violation = 0.0;
  double max_integrality_violation = 0.0;
  std::string worst_row;

  bool ok(double feas_tol, double int_tol) const {
    return max_row_violation <= feas_tol && max_bound_violation <= feas_tol &&
           max_integrality_violation <= int_tol;
  }
};

/// Re-evaluates x against the problem data directly, independent of any
/// solver state.
inline FeasibilityReport check_feasibility(const MilpProblem& p, const std::vector<double>& x) {
  FeasibilityReport r;
  if (x.size() != p.num_variables()) throw std::invalid_argument("assignment size mismatch");
  for (const auto& v : p.variables()) {
    const double xv = x[v.id.index];
    r.max_bound_violation = std::max({r.max_bound_violation, v.lower - xv, xv - v.upper});
    if (v.kind == VarKind::Binary)
      r.max_integrality_violation =
          std::max(r.max_integrality_violation, std::abs(xv - std::round(xv)));
  }
  for (const auto& row : p.constraints()) {
    const double viol = row_violation(row, x);
    if (viol > r.max_row_violation) {
      r.max_row_violation = viol;
      r.worst_row = row.label;
    }
  }
  return r;
}

}  // namespace nexusplan

#pragma once

// Best-bound branch and bound over binary variables, using the bounded
// simplex on every node relaxation (no warm starts).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <vector>

#include "milp.hpp"
#include "simplex.hpp"

namespace nexusplan {

namespace detail {

struct BranchNode {
  double bound;
  std::size_t depth;
  std::size_t seq;
  std::size_t branch_var;  // most fractional binary of this node's relaxation
  std::vector<std::pair<std::size_t, double>> fixings;
};

// Lowest bound first; ties go to the deeper node, then to the older one.
struct NodeOrder {
  bool operator()(const BranchNode& a, const BranchNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

inline std::optional<std::size_t> most_fractional(const MilpProblem& p,
                                                  const std::vector<double>& x,
                                                  double int_tol) {
  std::optional<std::size_t> pick;
  double best = int_tol;
  for (const auto& v : p.variables()) {
    if (v.kind != VarKind::Binary) continue;
    const double xv = x[v.id.index];
    const double frac = std::min(xv - std::floor(xv), std::ceil(xv) - xv);
    if (frac > best) {  // strict: lowest id wins ties
      best = frac;
      pick = v.id.index;
    }
  }
  return pick;
}

}  // namespace detail

/// Solves `problem` to proven optimality over its binaries. Node LPs are
/// solved when created; a node is pruned once its relaxation bound reaches
/// the incumbent within the objective tolerance.
inline SolveResult solve_milp(const MilpProblem& problem, const SolverOptions& opt = {}) {
  if (problem.num_binaries() == 0) return solve_lp(problem, opt);

  const auto base_lo = detail::lower_bounds(problem);
  const auto base_hi = detail::upper_bounds(problem);
  const double int_tol = opt.tol.integrality;

  SolveResult best;
  best.status = SolveStatus::Infeasible;
  std::optional<SolveStatus> stopped;
  double incumbent = kInfinity;
  std::size_t nodes = 0;
  std::size_t pivots = 0;
  std::size_t seq = 0;

  const auto prune_level = [&](double inc) {
    return inc - std::max(opt.tol.objective, opt.tol.objective * std::abs(inc));
  };

  std::priority_queue<detail::BranchNode, std::vector<detail::BranchNode>, detail::NodeOrder> open;

  std::vector<double> lo, hi;
  // Solves the relaxation under `fixings`. Returns false when the search must
  // stop (limit hit or unbounded relaxation), recording why in `stopped`.
  const auto evaluate = [&](std::vector<std::pair<std::size_t, double>> fixings,
                            std::size_t depth) -> bool {
    if (nodes >= opt.max_nodes) {
      stopped = SolveStatus::IterationLimit;
      return false;
    }
    ++nodes;
    lo = base_lo;
    hi = base_hi;
    for (const auto& [j, v] : fixings) lo[j] = hi[j] = v;
    auto r = solve_lp(problem, lo, hi, opt);
    pivots += r.pivots;
    if (r.status == SolveStatus::Infeasible) return true;
    if (r.status == SolveStatus::IterationLimit || r.status == SolveStatus::Unbounded) {
      stopped = r.status;
      return false;
    }
    const double bound = *r.objective;
    if (bound >= prune_level(incumbent)) return true;
    const auto frac = detail::most_fractional(problem, r.assignment, int_tol);
    if (!frac) {
      incumbent = bound;
      best = std::move(r);
      return true;
    }
    open.push({bound, depth, seq++, *frac, std::move(fixings)});
    return true;
  };

  bool running = evaluate({}, 0);
  while (running && !open.empty()) {
    auto node = open.top();
    open.pop();
    if (node.bound >= prune_level(incumbent)) break;  // every open node is no better
    auto down = node.fixings;
    down.emplace_back(node.branch_var, 0.0);
    auto up = std::move(node.fixings);
    up.emplace_back(node.branch_var, 1.0);
    running = evaluate(std::move(down), node.depth + 1) && evaluate(std::move(up), node.depth + 1);
  }

  if (stopped) {
    // an incumbent, if any, is not proven optimal
    SolveResult out;
    out.status = *stopped;
    out.nodes = nodes;
    out.pivots = pivots;
    return out;
  }
  best.nodes = nodes;
  best.pivots = pivots;
  if (best.status == SolveStatus::Optimal) {
    for (const auto& v : problem.variables())
      if (v.kind == VarKind::Binary) best.assignment[v.id.index] = std::round(best.assignment[v.id.index]);
    best.objective = problem.evaluate_objective(best.assignment);
  }
  return best;
}

}  // namespace nexusplan

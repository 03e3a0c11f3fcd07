#pragma once

// Scenario pipeline: robust solve per scenario, fuzzy weight defuzzification
// and normalisation, expected total cost, and (alpha, gamma) sweeps.

#include <functional>
#include <future>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "branch_bound.hpp"
#include "fuzzy.hpp"
#include "milp.hpp"
#include "nexus.hpp"
#include "robust.hpp"

namespace nexusplan {

using MilpSolver = std::function<SolveResult(const MilpProblem&, const SolverOptions&)>;

struct PlannerOptions {
  SolverOptions solver;
  RobustOptions robust;
  bool parallel = true;  // scenario solves may run concurrently
  MilpSolver milp_solver;  // empty: embedded branch and bound
  Defuzzification weight_rule = Defuzzification::Optimistic;
  // confidence level used for weight defuzzification; defaults to the
  // request's alpha
  std::optional<ConfidenceLevel> weight_alpha;
};

struct PlanRequest {
  SystemProfile profile;
  std::vector<Scenario> scenarios;
  ConfidenceLevel alpha;
  RobustBudget gamma;
  MeasureKind measure = MeasureKind::Credibility;
};

class DegenerateWeightsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioSolve {
  std::optional<double> cost;  // present iff result is Optimal
  SolveResult result;
};

inline SolveResult run_solver(const MilpProblem& problem, const PlannerOptions& opt) {
  return opt.milp_solver ? opt.milp_solver(problem, opt.solver) : solve_milp(problem, opt.solver);
}

/// MILP optimum of the robust counterpart of the scenario model.
inline ScenarioSolve solve_scenario(const SystemProfile& profile, const Scenario& scenario, ConfidenceLevel alpha,
                                    RobustBudget gamma, MeasureKind measure, const PlannerOptions& opt = {}) {
  const auto built = build_model(profile, scenario, alpha, measure);
  ScenarioSolve out;
  out.result = run_solver(robustify(built.problem, built.uncertain, gamma, opt.robust), opt);
  if (out.result.optimal()) out.cost = out.result.objective;
  return out;
}

/// Deterministic baseline solve for one scenario.
inline ScenarioSolve solve_deterministic(const SystemProfile& profile, const Scenario& scenario,
                                         const PlannerOptions& opt = {}) {
  ScenarioSolve out;
  out.result = run_solver(deterministic_model(profile, scenario).problem, opt);
  if (out.result.optimal()) out.cost = out.result.objective;
  return out;
}

inline std::vector<double> crisp_weights(std::span<const TrapezoidalFuzzyNumber> weights, ConfidenceLevel alpha,
                                         MeasureKind measure,
                                         Defuzzification rule = Defuzzification::Optimistic) {
  std::vector<double> out;
  out.reserve(weights.size());
  for (const auto& w : weights) out.push_back(defuzzify(w, alpha, measure, rule));
  return out;
}

/// Defuzzified weights divided by their sum.
inline std::vector<double> normalize_weights(std::span<const TrapezoidalFuzzyNumber> weights, ConfidenceLevel alpha,
                                             MeasureKind measure,
                                             Defuzzification rule = Defuzzification::Optimistic) {
  if (weights.empty()) throw DegenerateWeightsError("no scenario weights");
  auto w = crisp_weights(weights, alpha, measure, rule);
  double sum = 0.0;
  for (double v : w) {
    if (v < 0.0) throw DegenerateWeightsError("negative defuzzified weight " + std::to_string(v));
    sum += v;
  }
  if (!(sum > 0.0)) throw DegenerateWeightsError("defuzzified scenario weights sum to zero");
  for (auto& v : w) v /= sum;
  return w;
}

enum class OutcomeStatus { Ok, Infeasible, Unbounded, SolverLimit, DegenerateWeights };

inline std::string_view to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::Ok: return "ok";
    case OutcomeStatus::Infeasible: return "infeasible";
    case OutcomeStatus::Unbounded: return "unbounded";
    case OutcomeStatus::SolverLimit: return "solver_limit";
    case OutcomeStatus::DegenerateWeights: return "degenerate_weights";
  }
  return "unknown";
}

struct ScenarioAudit {
  std::string name;
  TrapezoidalFuzzyNumber weight = TrapezoidalFuzzyNumber::crisp(0.0);
  double crisp_weight = 0.0;
  double normalized_weight = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<double> cost;
  std::size_t nodes = 0;
  std::size_t pivots = 0;
};

struct PlanOutcome {
  double alpha = 0.0;
  std::optional<double> gamma;  // empty for the deterministic baseline
  OutcomeStatus status = OutcomeStatus::Ok;
  std::string failure;  // names the offending scenario when status != Ok
  std::vector<ScenarioAudit> scenarios;
  std::optional<double> expected_cost;  // present iff status == Ok

  bool ok() const { return status == OutcomeStatus::Ok; }
};

namespace detail {

inline OutcomeStatus outcome_of(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return OutcomeStatus::Ok;
    case SolveStatus::Infeasible: return OutcomeStatus::Infeasible;
    case SolveStatus::Unbounded: return OutcomeStatus::Unbounded;
    case SolveStatus::IterationLimit: return OutcomeStatus::SolverLimit;
  }
  return OutcomeStatus::Infeasible;
}

// Runs `solve(i)` for every scenario and returns the results in index order.
template <class F>
std::vector<ScenarioSolve> solve_all(std::size_t n, bool parallel, F solve) {
  std::vector<ScenarioSolve> out(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = solve(i);
    return out;
  }
  std::vector<std::future<ScenarioSolve>> pending;
  pending.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pending.push_back(std::async(std::launch::async, solve, i));
  for (std::size_t i = 0; i < n; ++i) out[i] = pending[i].get();
  return out;
}

inline PlanOutcome reduce(const std::vector<Scenario>& scenarios, const std::vector<ScenarioSolve>& solves,
                          ConfidenceLevel weight_alpha, MeasureKind measure, Defuzzification rule) {
  PlanOutcome out;
  std::vector<TrapezoidalFuzzyNumber> weights;
  for (const auto& s : scenarios) weights.push_back(s.weight);
  const auto crisp = crisp_weights(weights, weight_alpha, measure, rule);
  std::vector<double> normalized(weights.size(), 0.0);
  try {
    normalized = normalize_weights(weights, weight_alpha, measure, rule);
  } catch (const DegenerateWeightsError& e) {
    out.status = OutcomeStatus::DegenerateWeights;
    out.failure = e.what();
  }
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& r = solves[i].result;
    out.scenarios.push_back({scenarios[i].name, scenarios[i].weight, crisp[i], normalized[i], r.status,
                             solves[i].cost, r.nodes, r.pivots});
    if (out.ok() && !r.optimal()) {
      out.status = outcome_of(r.status);
      out.failure = "scenario '" + scenarios[i].name + "': " + std::string(to_string(r.status));
    }
  }
  if (out.ok()) {
    double total = 0.0;
    for (const auto& a : out.scenarios) total += a.normalized_weight * *a.cost;
    out.expected_cost = total;
  }
  return out;
}

inline void check_request(const SystemProfile& profile, const std::vector<Scenario>& scenarios) {
  if (scenarios.empty()) throw ModelError("at least one scenario is required");
  if (const auto v = validate_profile(profile); !v.empty())
    throw ModelError("invalid profile: " + v.front().field + " " + v.front().message);
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    if (const auto v = validate_scenario(profile, scenarios[i], i); !v.empty())
      throw ModelError(v.front().field + " " + v.front().message);
}

}  // namespace detail

/// Solves every scenario, normalises the weights once and forms the
/// weighted sum. Intermediate values are kept in the outcome for audit.
inline PlanOutcome expected_total_cost(const PlanRequest& req, const PlannerOptions& opt = {}) {
  detail::check_request(req.profile, req.scenarios);
  const auto solves = detail::solve_all(req.scenarios.size(), opt.parallel, [&](std::size_t i) {
    return solve_scenario(req.profile, req.scenarios[i], req.alpha, req.gamma, req.measure, opt);
  });
  auto out = detail::reduce(req.scenarios, solves, opt.weight_alpha.value_or(req.alpha), req.measure,
                            opt.weight_rule);
  out.alpha = req.alpha.value();
  out.gamma = req.gamma.value();
  return out;
}

/// Deterministic-model costs weighted with the weights defuzzified at alpha.
inline PlanOutcome deterministic_expected_cost(const SystemProfile& profile, const std::vector<Scenario>& scenarios,
                                               ConfidenceLevel alpha, MeasureKind measure,
                                               const PlannerOptions& opt = {}) {
  detail::check_request(profile, scenarios);
  const auto solves = detail::solve_all(scenarios.size(), opt.parallel, [&](std::size_t i) {
    return solve_deterministic(profile, scenarios[i], opt);
  });
  auto out = detail::reduce(scenarios, solves, opt.weight_alpha.value_or(alpha), measure, opt.weight_rule);
  out.alpha = alpha.value();
  return out;
}

struct SweepGrid {
  std::vector<double> alphas;
  std::vector<double> gammas;
  std::vector<PlanOutcome> cells;     // row-major: alphas outer, gammas inner
  std::vector<PlanOutcome> baseline;  // one deterministic outcome per alpha

  const PlanOutcome& at(std::size_t a, std::size_t g) const { return cells.at(a * gammas.size() + g); }
};

/// Evaluates every (alpha, gamma) cell plus the deterministic baseline for
/// each alpha. Cell failures are recorded in the cell.
inline SweepGrid sweep(const SystemProfile& profile, const std::vector<Scenario>& scenarios,
                       std::span<const double> alphas, std::span<const double> gammas,
                       MeasureKind measure = MeasureKind::Credibility, const PlannerOptions& opt = {}) {
  if (alphas.empty() || gammas.empty()) throw std::invalid_argument("sweep grids must not be empty");
  detail::check_request(profile, scenarios);
  SweepGrid grid{{alphas.begin(), alphas.end()}, {gammas.begin(), gammas.end()}, {}, {}};
  for (double a : alphas) {
    const ConfidenceLevel alpha(a);
    for (double g : gammas)
      grid.cells.push_back(expected_total_cost({profile, scenarios, alpha, RobustBudget(g), measure}, opt));
    grid.baseline.push_back(deterministic_expected_cost(profile, scenarios, alpha, measure, opt));
  }
  return grid;
}

}  // namespace nexusplan

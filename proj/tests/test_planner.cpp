#include <gtest/gtest.h>

#include <random>

#include "nexusplan/io.hpp"
#include "nexusplan/planner.hpp"
#include "oracles.hpp"

using namespace nexusplan;

namespace {

using TFN = TrapezoidalFuzzyNumber;
constexpr auto kCred = MeasureKind::Credibility;
const std::vector<double> kGammas{0.0, 0.25, 0.5, 0.75, 1.0};

SystemProfile single_generator() {
  SystemProfile p;
  p.horizon = 1;
  p.generators = {{"g", 10.0, 0.0, 20.0, 0.0, 0.0, 1.0, false}};
  return p;
}

Scenario demand(const std::string& name, double mwh, TFN weight = TFN::crisp(1.0)) {
  return {name, weight, {mwh}, {0.0}, {}};
}

SystemProfile demo_profile() { return load_profile(NEXUSPLAN_DATA_DIR "/demo/profile.json"); }
std::vector<Scenario> demo_scenarios() { return load_scenarios(NEXUSPLAN_DATA_DIR "/demo/scenarios.json"); }

// Demo system cut to a short horizon so property sweeps stay quick.
std::pair<SystemProfile, std::vector<Scenario>> short_demo(int horizon) {
  auto p = demo_profile();
  auto s = demo_scenarios();
  p.horizon = horizon;
  for (auto& sc : s) {
    sc.power_demand.resize(horizon);
    sc.water_demand.resize(horizon);
    for (int t = 0; t < horizon; ++t) {
      sc.power_demand[t] = sc.power_demand[8 + t];
      sc.water_demand[t] = sc.water_demand[8 + t];
    }
  }
  return {p, s};
}

}  // namespace

TEST(NormalizeWeights, CrispDivision) {
  const std::vector<TFN> w{TFN::crisp(0.3), TFN::crisp(0.3), TFN::crisp(0.6)};
  const auto n = normalize_weights(w, ConfidenceLevel(0.4), kCred);
  EXPECT_NEAR(n[0], 0.25, 1e-15);
  EXPECT_NEAR(n[1], 0.25, 1e-15);
  EXPECT_NEAR(n[2], 0.5, 1e-15);
}

TEST(NormalizeWeights, IdenticalFuzzyWeightsAreUniform) {
  const std::vector<TFN> w(7, TFN{0.1, 0.3, 0.4, 0.9});
  for (double a : {0.0, 0.5, 1.0})
    for (double v : normalize_weights(w, ConfidenceLevel(a), kCred)) EXPECT_NEAR(v, 1.0 / 7.0, 1e-15);
}

TEST(NormalizeWeights, FuzzyWorkedExample) {
  const std::vector<TFN> w{{0.1, 0.2, 0.3, 0.4}, {0.2, 0.4, 0.6, 0.8}};
  const auto n = normalize_weights(w, ConfidenceLevel(0.5), kCred);
  EXPECT_NEAR(n[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(n[1], 2.0 / 3.0, 1e-12);
}

TEST(NormalizeWeights, DegenerateWeightsRejected) {
  const std::vector<TFN> zero{TFN::crisp(0.0), TFN::crisp(0.0)};
  EXPECT_THROW(normalize_weights(zero, ConfidenceLevel(0.5), kCred), DegenerateWeightsError);
  EXPECT_THROW(normalize_weights(std::vector<TFN>{}, ConfidenceLevel(0.5), kCred), DegenerateWeightsError);
}

TEST(NormalizeWeights, SumToOneOnRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    std::vector<TFN> w;
    const int n = 1 + int(rng() % 8);
    for (int i = 0; i < n; ++i) {
      double a = u(rng), b = a + u(rng), c = b + u(rng), d = c + u(rng);
      w.push_back({a, b, c, d});
    }
    for (auto m : {MeasureKind::Possibility, MeasureKind::Necessity, kCred})
      for (auto rule : {Defuzzification::Optimistic, Defuzzification::Pessimistic}) {
        const auto v = normalize_weights(w, ConfidenceLevel(u(rng)), m, rule);
        double sum = 0.0;
        for (double x : v) {
          ASSERT_GE(x, 0.0);
          sum += x;
        }
        ASSERT_NEAR(sum, 1.0, 1e-9);
      }
  }
}

TEST(SolveScenario, InertStagesMatchDeterministic) {
  const auto p = single_generator();
  const auto s = demand("s", 8.0);
  const auto r = solve_scenario(p, s, ConfidenceLevel(0.0), RobustBudget(0.0), kCred);
  const auto d = solve_deterministic(p, s);
  ASSERT_TRUE(r.cost && d.cost);
  EXPECT_EQ(*r.cost, *d.cost);
  EXPECT_EQ(*r.cost, 160.0);
}

TEST(SolveScenario, NondecreasingInGamma) {
  auto p = single_generator();
  p.penalties.unmet_power = 500.0;
  p.transmission.loss_fraction = 0.05;
  p.transmission.loss_deviation = 0.05;
  double prev = -kInfinity;
  for (double g : kGammas) {
    const auto r = solve_scenario(p, demand("s", 9.5), ConfidenceLevel(0.0), RobustBudget(g), kCred);
    ASSERT_TRUE(r.cost);
    EXPECT_GE(*r.cost, prev);
    prev = *r.cost;
  }
  EXPECT_GT(prev, 9.5 / 0.95 * 20.0);
}

TEST(SolveScenario, InfeasibleWithoutPenalty) {
  const auto r = solve_scenario(single_generator(), demand("s", 12.0), ConfidenceLevel(0.0), RobustBudget(0.0), kCred);
  EXPECT_EQ(r.result.status, SolveStatus::Infeasible);
  EXPECT_FALSE(r.cost);
}

TEST(SolveScenario, SolverLimitPropagates) {
  const auto [p, s] = short_demo(4);
  PlannerOptions opt;
  opt.solver.max_pivots = 5;
  const auto r = solve_scenario(p, s[0], ConfidenceLevel(0.5), RobustBudget(0.5), kCred, opt);
  EXPECT_EQ(r.result.status, SolveStatus::IterationLimit);
  EXPECT_FALSE(r.cost);
}

TEST(ExpectedCost, EngineeredTwoScenarios) {
  const PlanRequest req{single_generator(),
                        {demand("low", 5.0, TFN::crisp(0.6)), demand("high", 10.0, TFN::crisp(0.4))},
                        ConfidenceLevel(0.3), RobustBudget(0.0), kCred};
  const auto o = expected_total_cost(req);
  ASSERT_TRUE(o.ok());
  ASSERT_EQ(o.scenarios.size(), 2u);
  EXPECT_EQ(*o.scenarios[0].cost, 100.0);
  EXPECT_EQ(*o.scenarios[1].cost, 200.0);
  EXPECT_NEAR(o.scenarios[0].normalized_weight, 0.6, 1e-15);
  EXPECT_NEAR(*o.expected_cost, 140.0, 1e-12);
}

TEST(ExpectedCost, SingleScenarioIsItsCost) {
  const PlanRequest req{single_generator(), {demand("only", 7.0, TFN{0.1, 0.2, 0.5, 0.9})}, ConfidenceLevel(0.7),
                        RobustBudget(0.0), kCred};
  const auto o = expected_total_cost(req);
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o.scenarios[0].normalized_weight, 1.0);
  EXPECT_EQ(*o.expected_cost, 140.0);
}

TEST(ExpectedCost, FailureNamesScenario) {
  const PlanRequest req{single_generator(), {demand("fine", 5.0), demand("too_much", 12.0)}, ConfidenceLevel(0.0),
                        RobustBudget(0.0), kCred};
  const auto o = expected_total_cost(req);
  EXPECT_EQ(o.status, OutcomeStatus::Infeasible);
  EXPECT_NE(o.failure.find("too_much"), std::string::npos);
  EXPECT_FALSE(o.expected_cost);
  EXPECT_TRUE(o.scenarios[0].cost);
}

TEST(ExpectedCost, DemoMatchesHandComposedPipeline) {
  const PlanRequest req{demo_profile(), demo_scenarios(), ConfidenceLevel(0.5), RobustBudget(0.5), kCred};
  const auto o = expected_total_cost(req);
  ASSERT_TRUE(o.ok());
  std::vector<TFN> w;
  for (const auto& s : req.scenarios) w.push_back(s.weight);
  const auto n = normalize_weights(w, req.alpha, kCred);
  double total = 0.0;
  for (std::size_t i = 0; i < req.scenarios.size(); ++i) {
    const auto r = solve_scenario(req.profile, req.scenarios[i], req.alpha, req.gamma, kCred);
    ASSERT_TRUE(r.cost);
    EXPECT_EQ(*r.cost, *o.scenarios[i].cost);
    EXPECT_EQ(n[i], o.scenarios[i].normalized_weight);
    total += n[i] * *r.cost;
  }
  EXPECT_NEAR(*o.expected_cost, total, 1e-9 * std::abs(total));
}

TEST(ExpectedCost, ParallelAndSerialAgreeBitForBit) {
  const auto [p, s] = short_demo(6);
  const PlanRequest req{p, s, ConfidenceLevel(0.5), RobustBudget(0.75), kCred};
  PlannerOptions serial;
  serial.parallel = false;
  const auto a = expected_total_cost(req, serial);
  const auto b = expected_total_cost(req);
  const auto c = expected_total_cost(req);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(*a.expected_cost, *b.expected_cost);
  EXPECT_EQ(*b.expected_cost, *c.expected_cost);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(*a.scenarios[i].cost, *b.scenarios[i].cost);
}

TEST(ExpectedCost, CustomSolverHookIsUsed) {
  int calls = 0;
  PlannerOptions opt;
  opt.parallel = false;
  opt.milp_solver = [&](const MilpProblem& p, const SolverOptions& so) {
    ++calls;
    return solve_milp(p, so);
  };
  const PlanRequest req{single_generator(), {demand("a", 1.0), demand("b", 2.0)}, ConfidenceLevel(0.0),
                        RobustBudget(0.0), kCred};
  EXPECT_TRUE(expected_total_cost(req, opt).ok());
  EXPECT_EQ(calls, 2);
}

TEST(ExpectedCost, NondecreasingInAlphaWithCrispWeights) {
  auto [p, s] = short_demo(4);
  for (auto& sc : s) sc.weight = TFN::crisp(sc.weight.nu2());
  // a two-sided trapezoid so the coefficient moves over the whole alpha range
  p.batteries[0].discharge_efficiency.value = {0.8, 0.85, 0.9, 0.95};
  p.water.purification_efficiency.value = {0.82, 0.88, 0.92, 0.97};
  for (auto measure : {kCred, MeasureKind::Necessity, MeasureKind::Possibility}) {
    double prev = -kInfinity;
    for (int i = 0; i <= 10; ++i) {
      const auto o = expected_total_cost({p, s, ConfidenceLevel(i / 10.0), RobustBudget(0.5), measure});
      ASSERT_TRUE(o.ok());
      EXPECT_GE(*o.expected_cost, prev - 1e-6) << to_string(measure) << " " << i;
      prev = *o.expected_cost;
    }
  }
}

TEST(ExpectedCost, DegenerateCollapseToWeightedDeterministic) {
  auto [p, s] = short_demo(6);
  p.batteries[0].discharge_efficiency = FuzzyParameter::crisp(0.9);
  p.water.purification_efficiency = FuzzyParameter::crisp(0.93);
  const double w[] = {0.5, 0.3, 0.2};
  for (std::size_t i = 0; i < s.size(); ++i) s[i].weight = TFN::crisp(w[i]);
  for (double a : {0.0, 0.6}) {
    const auto o = expected_total_cost({p, s, ConfidenceLevel(a), RobustBudget(0.0), kCred});
    ASSERT_TRUE(o.ok());
    double manual = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) manual += w[i] * *solve_deterministic(p, s[i]).cost;
    EXPECT_NEAR(*o.expected_cost, manual, 1e-9);
  }
}

TEST(Sweep, GridShapeAndMonotoneRows) {
  const auto [p, s] = short_demo(6);
  const std::vector<double> alphas{0.0, 0.5};
  const auto grid = sweep(p, s, alphas, kGammas);
  ASSERT_EQ(grid.cells.size(), 10u);
  ASSERT_EQ(grid.baseline.size(), 2u);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    ASSERT_TRUE(grid.baseline[a].ok());
    for (std::size_t g = 0; g < kGammas.size(); ++g) {
      const auto& c = grid.at(a, g);
      ASSERT_TRUE(c.ok());
      EXPECT_EQ(c.alpha, alphas[a]);
      EXPECT_EQ(*c.gamma, kGammas[g]);
      EXPECT_LE(*grid.baseline[a].expected_cost, *c.expected_cost + 1e-9);
      if (g > 0) {
        EXPECT_GE(*c.expected_cost, *grid.at(a, g - 1).expected_cost - 1e-9);
      }
    }
  }
}

TEST(Sweep, SingleCellEqualsExpectedCost) {
  const auto [p, s] = short_demo(4);
  const std::vector<double> zero{0.0};
  const auto grid = sweep(p, s, zero, zero);
  ASSERT_EQ(grid.cells.size(), 1u);
  const auto o = expected_total_cost({p, s, ConfidenceLevel(0.0), RobustBudget(0.0), kCred});
  EXPECT_EQ(*grid.cells[0].expected_cost, *o.expected_cost);
}

TEST(Sweep, FailedCellsRecordedNotThrown) {
  auto p = single_generator();
  p.transmission.loss_fraction = 0.1;
  p.transmission.loss_deviation = 0.2;
  // 9 MWh fits nominally (9 delivered) but not under the worst-case loss
  const std::vector<Scenario> s{demand("tight", 8.9)};
  const std::vector<double> alphas{0.0};
  const auto grid = sweep(p, s, alphas, kGammas);
  EXPECT_TRUE(grid.cells.front().ok());
  EXPECT_EQ(grid.cells.back().status, OutcomeStatus::Infeasible);
  EXPECT_TRUE(grid.baseline.front().ok());
}

TEST(Sweep, RejectsEmptyGrids) {
  const auto [p, s] = short_demo(2);
  const std::vector<double> none, one{0.0};
  EXPECT_THROW(sweep(p, s, none, one), std::invalid_argument);
  EXPECT_THROW(sweep(p, s, one, none), std::invalid_argument);
  EXPECT_THROW(sweep(p, {}, one, one), ModelError);
}

#include <gtest/gtest.h>

#include "nexusplan/branch_bound.hpp"
#include "nexusplan/nexus.hpp"
#include "nexusplan/robust.hpp"

using namespace nexusplan;

namespace {

SystemProfile one_generator(int horizon = 1) {
  SystemProfile p;
  p.horizon = horizon;
  Generator g;
  g.name = "g1";
  g.capacity_mw = 10.0;
  g.fuel_cost = 20.0;
  p.generators.push_back(g);
  return p;
}

Scenario flat(const SystemProfile& p, double power, double water) {
  Scenario s;
  s.name = "s";
  s.power_demand.assign(p.horizon, power);
  s.water_demand.assign(p.horizon, water);
  return s;
}

// Small coupled system: two generators, one battery, water chain.
SystemProfile coupled(int horizon = 3) {
  SystemProfile p;
  p.horizon = horizon;
  Generator a{"base", 40.0, 10.0, 18.0, 50.0, 600.0, 4.0, true};
  Generator b{"peak", 25.0, 5.0, 45.0, 30.0, 200.0, 2.0, false};
  p.generators = {a, b};
  Battery bat;
  bat.name = "bat";
  bat.energy_capacity_mwh = 20.0;
  bat.max_power_mw = 8.0;
  bat.charge_efficiency = FuzzyParameter::crisp(0.95);
  bat.discharge_efficiency = {{0.80, 0.85, 0.90, 0.95}, ConstraintSense::FuzzyGE};
  p.batteries = {bat};
  p.water = {6.0, 30.0, 1.5, 5.0, 2.0, {{0.85, 0.9, 0.95, 0.98}, ConstraintSense::FuzzyGE}, 10.0};
  p.wastewater = {4.0, 1.0, 0.8, 5.0};
  p.transmission = {80.0, 0.04, 0.01, 8.0};
  p.penalties = {2000.0, 3000.0, 400.0};
  return p;
}

Scenario varying(const SystemProfile& p) {
  Scenario s;
  s.name = "v";
  for (int t = 0; t < p.horizon; ++t) {
    s.power_demand.push_back(30.0 + 12.0 * (t % 3));
    s.water_demand.push_back(2.0 + 0.5 * (t % 2));
  }
  return s;
}

double solve_cost(const BuiltModel& m, double gamma = 0.0) {
  const auto r = solve_milp(robustify(m.problem, m.uncertain, RobustBudget(gamma)));
  EXPECT_TRUE(r.optimal()) << to_string(r.status);
  return r.objective.value_or(kInfinity);
}

const LinearConstraint& row(const MilpProblem& p, const std::string& label) {
  const auto i = p.find_row(label);
  if (!i) throw std::out_of_range("no row " + label);
  return p.constraints()[*i];
}

double coef(const LinearConstraint& r, VarId v) {
  double c = 0.0;
  for (const auto& t : r.terms)
    if (t.var == v) c += t.coef;
  return c;
}

}  // namespace

TEST(Validate, WellFormedProfileHasNoViolations) {
  EXPECT_TRUE(validate_profile(coupled()).empty());
  EXPECT_TRUE(validate_scenario(coupled(), varying(coupled())).empty());
}

TEST(Validate, NegativePenaltyNamesField) {
  auto p = coupled();
  p.penalties.unmet_water = -1.0;
  const auto v = validate_profile(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "penalties.unmet_water");
}

TEST(Validate, EfficiencySupportAboveOne) {
  auto p = coupled();
  p.batteries[0].discharge_efficiency.value = {0.7, 0.8, 0.9, 1.1};
  const auto v = validate_profile(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "batteries[0].discharge_efficiency");
  EXPECT_NE(v[0].message.find("exceeds 1"), std::string::npos);
}

TEST(Validate, ScenarioSeriesLength) {
  const auto p = coupled(24);
  auto s = flat(p, 1.0, 1.0);
  s.power_demand.pop_back();
  const auto v = validate_scenario(p, s, 2);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "scenarios[2].power_demand");
  EXPECT_THROW(build_model(p, s, ConfidenceLevel(0.5)), ModelError);
}

TEST(Validate, UnknownAvailabilityAsset) {
  const auto p = coupled();
  auto s = varying(p);
  s.availability["turbine"] = 0.5;
  s.availability["peak"] = 1.5;
  EXPECT_EQ(validate_scenario(p, s).size(), 2u);
}

TEST(NexusModel, SingleGeneratorHandCost) {
  const auto p = one_generator();
  const auto m = build_model(p, flat(p, 8.0, 0.0), ConfidenceLevel(0.5));
  const auto r = solve_milp(m.problem);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(*r.objective, 160.0, 1e-9);
  EXPECT_NEAR(r.value(m.layout.gen_output[0][0]), 8.0, 1e-9);
}

TEST(NexusModel, ZeroDemandCostsNothing) {
  const auto p = coupled(4);
  const auto m = build_model(p, flat(p, 0.0, 0.0), ConfidenceLevel(0.5));
  const auto r = solve_milp(m.problem);
  ASSERT_TRUE(r.optimal());
  // base starts on but may switch off at no cost
  EXPECT_NEAR(*r.objective, 0.0, 1e-9);
  for (const auto& series : m.layout.gen_on)
    for (auto u : series) EXPECT_EQ(r.value(u), 0.0);
}

TEST(NexusModel, ShortfallPaysPenalty) {
  auto p = one_generator();
  p.penalties.unmet_power = 1000.0;
  const auto m = build_model(p, flat(p, 15.0, 0.0), ConfidenceLevel(0.5));
  const auto r = solve_milp(m.problem);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value(m.layout.unmet_power[0]), 5.0, 1e-9);
  EXPECT_NEAR(*r.objective, 10.0 * 20.0 + 5.0 * 1000.0, 1e-9);
}

TEST(NexusModel, DisabledPenaltyMakesShortfallInfeasible) {
  auto p = one_generator();
  p.penalties.unmet_power.reset();
  const auto m = build_model(p, flat(p, 15.0, 0.0), ConfidenceLevel(0.5));
  EXPECT_EQ(solve_milp(m.problem).status, SolveStatus::Infeasible);
}

TEST(NexusModel, BalanceRowsHoldOnOptimalSolutions) {
  const auto p = coupled(4);
  const auto s = varying(p);
  for (double alpha : {0.0, 0.5, 0.9})
    for (double gamma : {0.0, 0.5, 1.0}) {
      const auto m = build_model(p, s, ConfidenceLevel(alpha));
      const auto r = solve_milp(robustify(m.problem, m.uncertain, RobustBudget(gamma)));
      ASSERT_TRUE(r.optimal());
      const auto& L = m.layout;
      const auto x = [&](VarId v) { return r.value(v); };
      for (int t = 0; t < p.horizon; ++t) {
        // power: recomputed from the profile, not from the stored row
        double supply = x(L.unmet_power[t]);
        double withdrawal = 0.0;
        for (std::size_t g = 0; g < p.generators.size(); ++g) {
          supply += (1.0 - p.transmission.loss_fraction) * x(L.gen_output[g][t]);
          withdrawal += p.generators[g].water_withdrawal_gal_per_mwh * 1e-6 * x(L.gen_output[g][t]);
        }
        supply += x(L.discharge[0][t]) - x(L.charge[0][t]);
        const double load = s.power_demand[t] + p.water.pumping_energy_mwh_per_mgal * x(L.extraction[t]) +
                            p.water.purification_energy_mwh_per_mgal * x(L.purified[t]) +
                            p.wastewater.treatment_energy_mwh_per_mgal * x(L.treated[t]);
        EXPECT_GT(supply - load, -1e-6);
        const double water = x(L.purified[t]) + x(L.unmet_water[t]) - s.water_demand[t] - withdrawal;
        EXPECT_GT(water, -1e-6);
        const double produced = p.wastewater.return_fraction * (s.water_demand[t] - x(L.unmet_water[t]));
        EXPECT_NEAR(x(L.treated[t]) + x(L.untreated[t]), produced, 1e-6);
      }
    }
}

TEST(NexusModel, CostNondecreasingInAlpha) {
  const auto p = coupled(3);
  const auto s = varying(p);
  for (auto measure : {MeasureKind::Credibility, MeasureKind::Possibility, MeasureKind::Necessity}) {
    double prev = -kInfinity;
    for (int i = 0; i <= 10; ++i) {
      const double c = solve_cost(build_model(p, s, ConfidenceLevel(i / 10.0), measure), 0.5);
      EXPECT_GE(c, prev - 1e-6) << to_string(measure) << " alpha " << i / 10.0;
      prev = c;
    }
  }
}

TEST(NexusModel, NoSpareCapacityNoShortfall) {
  auto p = coupled(3);
  p.penalties = {5000.0, 5000.0, 5000.0};
  const auto s = varying(p);
  const auto m = build_model(p, s, ConfidenceLevel(0.5));
  const auto r = solve_milp(robustify(m.problem, m.uncertain, RobustBudget(1.0)));
  ASSERT_TRUE(r.optimal());
  for (int t = 0; t < p.horizon; ++t) {
    EXPECT_NEAR(r.value(m.layout.unmet_power[t]), 0.0, 1e-9);
    EXPECT_NEAR(r.value(m.layout.unmet_water[t]), 0.0, 1e-9);
    EXPECT_NEAR(r.value(m.layout.untreated[t]), 0.0, 1e-9);
  }
}

TEST(NexusModel, ZeroCouplingSplitsIntoSubsystems) {
  auto p = coupled(2);
  for (auto& g : p.generators) g.water_withdrawal_gal_per_mwh = 0.0;
  p.water.pumping_energy_mwh_per_mgal = 0.0;
  p.water.purification_energy_mwh_per_mgal = 0.0;
  p.wastewater.treatment_energy_mwh_per_mgal = 0.0;
  const auto s = varying(p);
  const ConfidenceLevel a(0.5);
  const double full = solve_cost(build_model(p, s, a));

  auto power_only = s;
  power_only.water_demand.assign(p.horizon, 0.0);
  auto water_profile = p;
  water_profile.generators.clear();
  water_profile.batteries.clear();
  auto water_only = s;
  water_only.power_demand.assign(p.horizon, 0.0);
  const double sum = solve_cost(build_model(p, power_only, a)) + solve_cost(build_model(water_profile, water_only, a));
  EXPECT_NEAR(full, sum, 1e-6);
}

TEST(NexusModel, WithdrawalCouplingCostsMore) {
  auto p = coupled(2);
  const auto s = varying(p);
  const double base = solve_cost(build_model(p, s, ConfidenceLevel(0.5)));
  for (auto& g : p.generators) g.water_withdrawal_gal_per_mwh *= 400.0;
  EXPECT_GT(solve_cost(build_model(p, s, ConfidenceLevel(0.5))), base + 1e-6);
}

TEST(DeterministicModel, MidpointDischargeEfficiency) {
  const auto p = coupled(2);
  const auto m = deterministic_model(p, varying(p));
  EXPECT_TRUE(m.uncertain.empty());
  EXPECT_DOUBLE_EQ(m.crisp.discharge_efficiency[0], 0.875);
  const auto& r = row(m.problem, "soc[bat,t1]");
  EXPECT_DOUBLE_EQ(coef(r, m.layout.soc[0][1]), 0.875);
  EXPECT_DOUBLE_EQ(coef(r, m.layout.soc[0][0]), -0.875);
  EXPECT_DOUBLE_EQ(coef(r, m.layout.discharge[0][1]), 1.0);
}

TEST(DeterministicModel, CrispProfileMatchesAnyAlpha) {
  auto p = coupled(2);
  p.batteries[0].discharge_efficiency = FuzzyParameter::crisp(0.9);
  p.water.purification_efficiency = FuzzyParameter::crisp(0.92);
  const auto s = varying(p);
  const auto d = deterministic_model(p, s);
  for (double a : {0.0, 0.3, 1.0}) {
    const auto m = build_model(p, s, ConfidenceLevel(a));
    ASSERT_EQ(m.problem.num_constraints(), d.problem.num_constraints());
    for (std::size_t i = 0; i < d.problem.num_constraints(); ++i) {
      const auto& x = m.problem.constraints()[i];
      const auto& y = d.problem.constraints()[i];
      ASSERT_EQ(x.label, y.label);
      ASSERT_EQ(x.rhs, y.rhs);
      ASSERT_EQ(x.terms.size(), y.terms.size());
      for (std::size_t k = 0; k < x.terms.size(); ++k) {
        ASSERT_EQ(x.terms[k].var, y.terms[k].var);
        ASSERT_EQ(x.terms[k].coef, y.terms[k].coef);
      }
    }
    EXPECT_EQ(m.problem.objective(), d.problem.objective());
    EXPECT_NEAR(solve_cost(m, 0.0), solve_cost(d), 1e-9);
  }
}

TEST(DeterministicModel, NoCostlierThanConservativeFuzzy) {
  const auto p = coupled(3);
  const auto s = varying(p);
  const double det = solve_cost(deterministic_model(p, s));
  const auto m = build_model(p, s, ConfidenceLevel(0.75));
  // both fuzzy efficiencies sit below their core midpoint at this level
  EXPECT_LT(m.crisp.discharge_efficiency[0], 0.875);
  EXPECT_LT(m.crisp.purification_efficiency, 0.925);
  for (double g : {0.0, 1.0}) EXPECT_LE(det, solve_cost(m, g) + 1e-9);
}

TEST(NexusModel, AvailabilityScalesCapacity) {
  auto p = one_generator();
  p.penalties.unmet_power = 100.0;
  auto s = flat(p, 8.0, 0.0);
  s.availability["g1"] = 0.5;
  const auto m = build_model(p, s, ConfidenceLevel(0.0));
  const auto r = solve_milp(m.problem);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value(m.layout.unmet_power[0]), 3.0, 1e-9);
}

TEST(NexusModel, RangedParametersEmitUncertainEntries) {
  const auto p = coupled(2);
  const auto m = build_model(p, varying(p), ConfidenceLevel(0.5));
  // per period: two capacity rows and two loss entries on the balance row
  EXPECT_EQ(m.uncertain.size(), 8u);
  auto q = p;
  q.uncertainty.ranged_transmission_loss = false;
  q.uncertainty.ranged_generator_capacity = false;
  EXPECT_TRUE(build_model(q, varying(q), ConfidenceLevel(0.5)).uncertain.empty());
}

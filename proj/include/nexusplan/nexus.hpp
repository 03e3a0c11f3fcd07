#pragma once

// Desk-scale energy-water nexus unit-commitment model.
//
// Per hourly period t the model couples
//   - thermal generators (on/off, min output, startup indicator) feeding an
//     aggregate lossy power line,
//   - batteries with a state-of-charge recursion,
//   - raw water extraction, purification and delivery through one pipe,
//   - wastewater treatment of the return flow,
// through a power balance (water-side electrical load) and a water balance
// (generator withdrawal). Shortfalls are priced by penalty slacks.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuzzy.hpp"
#include "milp.hpp"
#include "robust.hpp"

namespace nexusplan {

/// A fuzzy-capable model parameter together with the direction of the event
/// its chance constraint guards.
struct FuzzyParameter {
  TrapezoidalFuzzyNumber value = TrapezoidalFuzzyNumber::crisp(1.0);
  ConstraintSense sense = ConstraintSense::FuzzyGE;

  static FuzzyParameter crisp(double v, ConstraintSense s = ConstraintSense::FuzzyGE) {
    return {TrapezoidalFuzzyNumber::crisp(v), s};
  }
};

struct Generator {
  std::string name;
  double capacity_mw = 0.0;
  double min_output_mw = 0.0;
  double fuel_cost = 0.0;     // $/MWh
  double startup_cost = 0.0;  // $ per start
  double water_withdrawal_gal_per_mwh = 0.0;
  double capacity_deviation_mw = 0.0;  // half-width of the ranged capacity
  bool initially_on = false;
};

struct Battery {
  std::string name;
  double energy_capacity_mwh = 0.0;
  double max_power_mw = 0.0;
  FuzzyParameter charge_efficiency = FuzzyParameter::crisp(1.0);
  FuzzyParameter discharge_efficiency = FuzzyParameter::crisp(1.0);
  double initial_soc_fraction = 0.5;
};

struct WaterSystem {
  double extraction_capacity_mgal_h = 0.0;
  double extraction_cost = 0.0;  // $/Mgal
  double pumping_energy_mwh_per_mgal = 0.0;
  double purification_capacity_mgal_h = 0.0;
  double purification_energy_mwh_per_mgal = 0.0;
  FuzzyParameter purification_efficiency = FuzzyParameter::crisp(1.0);
  double purification_cost = 0.0;  // $/Mgal purified
};

struct WastewaterSystem {
  double treatment_capacity_mgal_h = 0.0;
  double treatment_energy_mwh_per_mgal = 0.0;
  double return_fraction = 0.0;
  double treatment_cost = 0.0;  // $/Mgal treated
};

struct Transmission {
  double line_capacity_mw = kInfinity;
  double loss_fraction = 0.0;
  double loss_deviation = 0.0;  // half-width of the ranged loss fraction
  double pipe_capacity_mgal_h = kInfinity;
};

/// Penalty prices; an empty optional disables the slack entirely.
struct Penalties {
  std::optional<double> unmet_power;           // $/MWh
  std::optional<double> unmet_water;           // $/Mgal
  std::optional<double> untreated_wastewater;  // $/Mgal
};

/// Which parameters enter as fuzzy chance constraints and which as ranged
/// robust coefficients. Fuzzy parameters left out collapse to their core
/// midpoint.
struct UncertaintySplit {
  bool fuzzy_charge_efficiency = false;
  bool fuzzy_discharge_efficiency = true;
  bool fuzzy_purification_efficiency = true;
  bool ranged_generator_capacity = true;
  bool ranged_transmission_loss = true;
};

struct SystemProfile {
  int horizon = 24;
  std::vector<Generator> generators;
  std::vector<Battery> batteries;
  WaterSystem water;
  WastewaterSystem wastewater;
  Transmission transmission;
  Penalties penalties;
  UncertaintySplit uncertainty;
};

struct Scenario {
  std::string name;
  TrapezoidalFuzzyNumber weight = TrapezoidalFuzzyNumber::crisp(1.0);
  std::vector<double> power_demand;  // MWh per period
  std::vector<double> water_demand;  // Mgal per period
  std::map<std::string, double> availability;  // asset name -> capacity multiplier
};

/// Asset names accepted in Scenario::availability besides generator and
/// battery names.
inline constexpr const char* kSystemAssets[] = {"extraction", "purification", "treatment",
                                                "power_line", "water_pipe"};

struct Violation {
  std::string field;
  std::string message;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string indexed(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void check_nonneg(std::vector<Violation>& out, const std::string& field, double v) {
  if (!(v >= 0.0)) out.push_back({field, "must be >= 0, got " + num(v)});
}

inline void check_efficiency(std::vector<Violation>& out, const std::string& field,
                             const FuzzyParameter& p) {
  if (!(p.value.nu1() > 0.0))
    out.push_back({field, "membership support must be > 0, got nu1=" + num(p.value.nu1())});
  if (!(p.value.nu4() <= 1.0))
    out.push_back({field, "membership support exceeds 1 (nu4=" + num(p.value.nu4()) + ")"});
}

}  // namespace detail

/// Checks every profile invariant; an empty result means the profile is valid.
inline std::vector<Violation> validate_profile(const SystemProfile& p) {
  using detail::check_nonneg;
  std::vector<Violation> out;
  if (p.horizon < 1) out.push_back({"horizon", "must be >= 1, got " + std::to_string(p.horizon)});
  std::map<std::string, int> names;
  for (std::size_t g = 0; g < p.generators.size(); ++g) {
    const auto& gen = p.generators[g];
    const auto f = detail::indexed("generators", g);
    if (gen.name.empty()) out.push_back({f + ".name", "must not be empty"});
    ++names[gen.name];
    check_nonneg(out, f + ".capacity_mw", gen.capacity_mw);
    check_nonneg(out, f + ".min_output_mw", gen.min_output_mw);
    check_nonneg(out, f + ".fuel_cost", gen.fuel_cost);
    check_nonneg(out, f + ".startup_cost", gen.startup_cost);
    check_nonneg(out, f + ".water_withdrawal_gal_per_mwh", gen.water_withdrawal_gal_per_mwh);
    check_nonneg(out, f + ".capacity_deviation_mw", gen.capacity_deviation_mw);
    if (gen.min_output_mw > gen.capacity_mw)
      out.push_back({f + ".min_output_mw", "exceeds capacity_mw " + detail::num(gen.capacity_mw)});
    if (gen.capacity_deviation_mw > gen.capacity_mw)
      out.push_back({f + ".capacity_deviation_mw", "exceeds capacity_mw " + detail::num(gen.capacity_mw)});
  }
  for (std::size_t b = 0; b < p.batteries.size(); ++b) {
    const auto& bat = p.batteries[b];
    const auto f = detail::indexed("batteries", b);
    if (bat.name.empty()) out.push_back({f + ".name", "must not be empty"});
    ++names[bat.name];
    check_nonneg(out, f + ".energy_capacity_mwh", bat.energy_capacity_mwh);
    check_nonneg(out, f + ".max_power_mw", bat.max_power_mw);
    detail::check_efficiency(out, f + ".charge_efficiency", bat.charge_efficiency);
    detail::check_efficiency(out, f + ".discharge_efficiency", bat.discharge_efficiency);
    if (!(bat.initial_soc_fraction >= 0.0 && bat.initial_soc_fraction <= 1.0))
      out.push_back({f + ".initial_soc_fraction", "must lie in [0,1], got " + detail::num(bat.initial_soc_fraction)});
  }
  for (const auto& [name, count] : names) {
    if (count > 1) out.push_back({"assets", "duplicate asset name '" + name + "'"});
    for (const char* reserved : kSystemAssets)
      if (name == reserved) out.push_back({"assets", "asset name '" + name + "' is reserved"});
  }
  const auto& w = p.water;
  check_nonneg(out, "water.extraction_capacity_mgal_h", w.extraction_capacity_mgal_h);
  check_nonneg(out, "water.extraction_cost", w.extraction_cost);
  check_nonneg(out, "water.pumping_energy_mwh_per_mgal", w.pumping_energy_mwh_per_mgal);
  check_nonneg(out, "water.purification_capacity_mgal_h", w.purification_capacity_mgal_h);
  check_nonneg(out, "water.purification_energy_mwh_per_mgal", w.purification_energy_mwh_per_mgal);
  check_nonneg(out, "water.purification_cost", w.purification_cost);
  detail::check_efficiency(out, "water.purification_efficiency", w.purification_efficiency);
  const auto& ww = p.wastewater;
  check_nonneg(out, "wastewater.treatment_capacity_mgal_h", ww.treatment_capacity_mgal_h);
  check_nonneg(out, "wastewater.treatment_energy_mwh_per_mgal", ww.treatment_energy_mwh_per_mgal);
  check_nonneg(out, "wastewater.treatment_cost", ww.treatment_cost);
  if (!(ww.return_fraction >= 0.0 && ww.return_fraction <= 1.0))
    out.push_back({"wastewater.return_fraction", "must lie in [0,1], got " + detail::num(ww.return_fraction)});
  const auto& tr = p.transmission;
  check_nonneg(out, "transmission.line_capacity_mw", tr.line_capacity_mw);
  check_nonneg(out, "transmission.pipe_capacity_mgal_h", tr.pipe_capacity_mgal_h);
  if (!(tr.loss_fraction >= 0.0 && tr.loss_fraction < 1.0))
    out.push_back({"transmission.loss_fraction", "must lie in [0,1), got " + detail::num(tr.loss_fraction)});
  check_nonneg(out, "transmission.loss_deviation", tr.loss_deviation);
  if (tr.loss_fraction + tr.loss_deviation >= 1.0)
    out.push_back({"transmission.loss_deviation", "worst-case loss must stay below 1"});
  if (p.penalties.unmet_power) check_nonneg(out, "penalties.unmet_power", *p.penalties.unmet_power);
  if (p.penalties.unmet_water) check_nonneg(out, "penalties.unmet_water", *p.penalties.unmet_water);
  if (p.penalties.untreated_wastewater)
    check_nonneg(out, "penalties.untreated_wastewater", *p.penalties.untreated_wastewater);
  return out;
}

/// Checks a scenario against the profile it will be run with. `index` only
/// prefixes the reported field paths.
inline std::vector<Violation> validate_scenario(const SystemProfile& p, const Scenario& s,
                                                std::size_t index = 0) {
  std::vector<Violation> out;
  const auto f = detail::indexed("scenarios", index);
  const auto check_series = [&](const char* field, const std::vector<double>& v) {
    if (p.horizon >= 1 && v.size() != static_cast<std::size_t>(p.horizon))
      out.push_back({f + "." + field, "has " + std::to_string(v.size()) + " entries, expected " +
                                          std::to_string(p.horizon)});
    for (std::size_t t = 0; t < v.size(); ++t)
      if (!(v[t] >= 0.0) || !std::isfinite(v[t]))
        out.push_back({detail::indexed(f + "." + field, t), "must be finite and >= 0, got " + detail::num(v[t])});
  };
  if (s.name.empty()) out.push_back({f + ".name", "must not be empty"});
  check_series("power_demand", s.power_demand);
  check_series("water_demand", s.water_demand);
  if (s.weight.nu1() < 0.0) out.push_back({f + ".weight", "must be >= 0, got nu1=" + detail::num(s.weight.nu1())});
  for (const auto& [asset, mult] : s.availability) {
    bool known = false;
    for (const auto& g : p.generators) known |= g.name == asset;
    for (const auto& b : p.batteries) known |= b.name == asset;
    for (const char* a : kSystemAssets) known |= asset == a;
    if (!known) out.push_back({f + ".availability." + asset, "unknown asset"});
    if (!(mult >= 0.0 && mult <= 1.0))
      out.push_back({f + ".availability." + asset, "multiplier must lie in [0,1], got " + detail::num(mult)});
  }
  return out;
}

/// Handles into a built model, per period.
struct ModelLayout {
  std::vector<std::vector<VarId>> gen_output, gen_on, gen_startup;  // [g][t]
  std::vector<std::vector<VarId>> charge, discharge, soc;           // [b][t]
  std::vector<VarId> unmet_power, extraction, purified, unmet_water, treated, untreated;  // [t]
  std::vector<std::size_t> power_balance_rows, water_balance_rows;  // [t]
  std::vector<std::vector<std::size_t>> soc_rows;                   // [b][t]
};

/// Crisp coefficients the builder actually used, for audit.
struct CrispParameters {
  std::vector<double> charge_efficiency, discharge_efficiency;  // per battery
  double purification_efficiency = 1.0;
};

struct BuiltModel {
  MilpProblem problem;
  std::vector<UncertainCoefficient> uncertain;
  ModelLayout layout;
  CrispParameters crisp;
};

namespace detail {

enum class BuildMode { FuzzyRobust, Deterministic };

inline double crisp_parameter(const FuzzyParameter& p, bool fuzzy, BuildMode mode,
                              ConfidenceLevel alpha, MeasureKind measure) {
  if (p.value.is_crisp()) return p.value.nu1();
  if (mode == BuildMode::Deterministic || !fuzzy) return p.value.core_midpoint();
  return measure_bound(p.value, alpha, p.sense, measure);
}

inline std::string period(const std::string& base, int t) { return base + "[t" + std::to_string(t) + "]"; }
inline std::string period(const std::string& base, const std::string& asset, int t) {
  return base + "[" + asset + ",t" + std::to_string(t) + "]";
}

inline BuiltModel build(const SystemProfile& p, const Scenario& s, ConfidenceLevel alpha,
                        MeasureKind measure, BuildMode mode) {
  if (const auto v = validate_profile(p); !v.empty())
    throw ModelError("invalid profile: " + v.front().field + " " + v.front().message);
  if (const auto v = validate_scenario(p, s); !v.empty())
    throw ModelError("invalid scenario '" + s.name + "': " + v.front().field + " " + v.front().message);

  const int T = p.horizon;
  const auto avail = [&](const std::string& asset) {
    const auto it = s.availability.find(asset);
    return it == s.availability.end() ? 1.0 : it->second;
  };
  const auto& split = p.uncertainty;
  const bool robust = mode == BuildMode::FuzzyRobust;

  BuiltModel bm;
  auto& m = bm.problem;
  auto& L = bm.layout;
  const std::size_t G = p.generators.size(), B = p.batteries.size();

  for (const auto& bat : p.batteries) {
    bm.crisp.charge_efficiency.push_back(
        crisp_parameter(bat.charge_efficiency, split.fuzzy_charge_efficiency, mode, alpha, measure));
    bm.crisp.discharge_efficiency.push_back(
        crisp_parameter(bat.discharge_efficiency, split.fuzzy_discharge_efficiency, mode, alpha, measure));
  }
  bm.crisp.purification_efficiency = crisp_parameter(
      p.water.purification_efficiency, split.fuzzy_purification_efficiency, mode, alpha, measure);

  // variables
  L.gen_output.resize(G);
  L.gen_on.resize(G);
  L.gen_startup.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    const auto& gen = p.generators[g];
    const double cap = gen.capacity_mw * avail(gen.name);
    for (int t = 0; t < T; ++t) {
      const auto p_gt = m.add_variable(period("gen", gen.name, t), 0.0, cap);
      const auto u_gt = m.add_binary(period("on", gen.name, t));
      const auto v_gt = m.add_variable(period("startup", gen.name, t), 0.0, 1.0);
      m.set_cost(p_gt, gen.fuel_cost);
      m.set_cost(v_gt, gen.startup_cost);
      L.gen_output[g].push_back(p_gt);
      L.gen_on[g].push_back(u_gt);
      L.gen_startup[g].push_back(v_gt);
    }
  }
  L.charge.resize(B);
  L.discharge.resize(B);
  L.soc.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& bat = p.batteries[b];
    const double pmax = bat.max_power_mw * avail(bat.name);
    for (int t = 0; t < T; ++t) {
      L.charge[b].push_back(m.add_variable(period("charge", bat.name, t), 0.0, pmax));
      L.discharge[b].push_back(m.add_variable(period("discharge", bat.name, t), 0.0, pmax));
      L.soc[b].push_back(m.add_variable(period("soc", bat.name, t), 0.0, bat.energy_capacity_mwh));
    }
  }
  const auto& pen = p.penalties;
  const double pipe = p.transmission.pipe_capacity_mgal_h * avail("water_pipe");
  const double purify_cap = p.water.purification_capacity_mgal_h * avail("purification");
  for (int t = 0; t < T; ++t) {
    const double wd = s.water_demand[t];
    L.unmet_power.push_back(m.add_variable(period("unmet_power", t), 0.0, pen.unmet_power ? kInfinity : 0.0));
    L.extraction.push_back(m.add_variable(period("extraction", t), 0.0,
                                          p.water.extraction_capacity_mgal_h * avail("extraction")));
    L.purified.push_back(m.add_variable(period("purified", t), 0.0, std::min(purify_cap, pipe)));
    L.unmet_water.push_back(m.add_variable(period("unmet_water", t), 0.0, pen.unmet_water ? wd : 0.0));
    L.treated.push_back(m.add_variable(period("treated", t), 0.0,
                                       p.wastewater.treatment_capacity_mgal_h * avail("treatment")));
    L.untreated.push_back(
        m.add_variable(period("untreated", t), 0.0, pen.untreated_wastewater ? kInfinity : 0.0));
    if (pen.unmet_power) m.set_cost(L.unmet_power[t], *pen.unmet_power);
    if (pen.unmet_water) m.set_cost(L.unmet_water[t], *pen.unmet_water);
    if (pen.untreated_wastewater) m.set_cost(L.untreated[t], *pen.untreated_wastewater);
    m.set_cost(L.extraction[t], p.water.extraction_cost);
    m.set_cost(L.purified[t], p.water.purification_cost);
    m.set_cost(L.treated[t], p.wastewater.treatment_cost);
  }

  const double delivered = 1.0 - p.transmission.loss_fraction;
  const double line_cap = p.transmission.line_capacity_mw * avail("power_line");
  for (int t = 0; t < T; ++t) {
    // power balance: delivered generation + storage + shortfall covers demand
    // plus the water system's electrical load (surplus may be spilled)
    std::vector<Term> bal;
    const auto pb_label = period("power_balance", t);
    for (std::size_t g = 0; g < G; ++g) {
      bal.push_back({L.gen_output[g][t], delivered});
      if (robust && split.ranged_transmission_loss && p.transmission.loss_deviation > 0.0)
        bm.uncertain.push_back({pb_label, L.gen_output[g][t], delivered, p.transmission.loss_deviation});
    }
    for (std::size_t b = 0; b < B; ++b) {
      bal.push_back({L.discharge[b][t], 1.0});
      bal.push_back({L.charge[b][t], -1.0});
    }
    bal.push_back({L.unmet_power[t], 1.0});
    bal.push_back({L.extraction[t], -p.water.pumping_energy_mwh_per_mgal});
    bal.push_back({L.purified[t], -p.water.purification_energy_mwh_per_mgal});
    bal.push_back({L.treated[t], -p.wastewater.treatment_energy_mwh_per_mgal});
    L.power_balance_rows.push_back(m.add_constraint(std::move(bal), RowSense::GE, s.power_demand[t], pb_label));

    if (std::isfinite(line_cap) && G > 0) {
      std::vector<Term> line;
      for (std::size_t g = 0; g < G; ++g) line.push_back({L.gen_output[g][t], 1.0});
      m.add_constraint(std::move(line), RowSense::LE, line_cap, period("line_capacity", t));
    }

    for (std::size_t g = 0; g < G; ++g) {
      const auto& gen = p.generators[g];
      const double a = avail(gen.name);
      const auto cap_label = period("gen_capacity", gen.name, t);
      m.add_constraint({{L.gen_output[g][t], 1.0}, {L.gen_on[g][t], -gen.capacity_mw * a}}, RowSense::LE, 0.0,
                       cap_label);
      if (robust && split.ranged_generator_capacity && gen.capacity_deviation_mw > 0.0)
        bm.uncertain.push_back({cap_label, L.gen_on[g][t], -gen.capacity_mw * a, gen.capacity_deviation_mw * a});
      m.add_constraint({{L.gen_output[g][t], 1.0}, {L.gen_on[g][t], -gen.min_output_mw}}, RowSense::GE, 0.0,
                       period("gen_min_output", gen.name, t));
      // startup_t >= on_t - on_{t-1}
      if (t == 0) {
        m.add_constraint({{L.gen_startup[g][t], 1.0}, {L.gen_on[g][t], -1.0}}, RowSense::GE,
                         gen.initially_on ? -1.0 : 0.0, period("gen_startup", gen.name, t));
      } else {
        m.add_constraint({{L.gen_startup[g][t], 1.0}, {L.gen_on[g][t], -1.0}, {L.gen_on[g][t - 1], 1.0}},
                         RowSense::GE, 0.0, period("gen_startup", gen.name, t));
      }
    }

    // water balance: delivered purified water + shortfall covers municipal
    // demand plus generator withdrawal (gal -> Mgal)
    std::vector<Term> wbal{{L.purified[t], 1.0}, {L.unmet_water[t], 1.0}};
    for (std::size_t g = 0; g < G; ++g)
      if (p.generators[g].water_withdrawal_gal_per_mwh > 0.0)
        wbal.push_back({L.gen_output[g][t], -p.generators[g].water_withdrawal_gal_per_mwh * 1e-6});
    L.water_balance_rows.push_back(
        m.add_constraint(std::move(wbal), RowSense::GE, s.water_demand[t], period("water_balance", t)));

    m.add_constraint({{L.purified[t], 1.0}, {L.extraction[t], -bm.crisp.purification_efficiency}}, RowSense::LE,
                     0.0, period("purification", t));

    // wastewater: treated + untreated = return fraction of served demand
    const double r = p.wastewater.return_fraction;
    m.add_constraint({{L.treated[t], 1.0}, {L.untreated[t], 1.0}, {L.unmet_water[t], r}}, RowSense::EQ,
                     r * s.water_demand[t], period("wastewater", t));
  }

  // state of charge, scaled through by the discharge efficiency:
  // eta_d*soc_t - eta_d*soc_{t-1} - eta_d*eta_c*charge_t + discharge_t = 0
  L.soc_rows.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& bat = p.batteries[b];
    const double ec = bm.crisp.charge_efficiency[b], ed = bm.crisp.discharge_efficiency[b];
    const double initial = bat.initial_soc_fraction * bat.energy_capacity_mwh;
    for (int t = 0; t < T; ++t) {
      std::vector<Term> row{{L.soc[b][t], ed}, {L.charge[b][t], -ed * ec}, {L.discharge[b][t], 1.0}};
      double rhs = 0.0;
      if (t == 0) {
        rhs = ed * initial;
      } else {
        row.push_back({L.soc[b][t - 1], -ed});
      }
      L.soc_rows[b].push_back(m.add_constraint(std::move(row), RowSense::EQ, rhs, period("soc", bat.name, t)));
    }
    m.add_constraint({{L.soc[b][T - 1], 1.0}}, RowSense::GE, initial, "soc_terminal[" + bat.name + "]");
  }
  return bm;
}

}  // namespace detail

/// Scenario model at confidence level alpha: fuzzy parameters become crisp
/// coefficients through the chance-constraint bound under `measure`; ranged
/// parameters are returned as nominal coefficients plus UncertainCoefficient
/// entries for robustify().
inline BuiltModel build_model(const SystemProfile& profile, const Scenario& scenario, ConfidenceLevel alpha,
                              MeasureKind measure = MeasureKind::Credibility) {
  return detail::build(profile, scenario, alpha, measure, detail::BuildMode::FuzzyRobust);
}

/// Baseline: fuzzy parameters at their core midpoint, no ranged uncertainty.
inline BuiltModel deterministic_model(const SystemProfile& profile, const Scenario& scenario) {
  return detail::build(profile, scenario, ConfidenceLevel(0.0), MeasureKind::Credibility,
                       detail::BuildMode::Deterministic);
}

}  // namespace nexusplan

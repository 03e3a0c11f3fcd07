#pragma once

// JSON profile/scenario loading, side-car CSV series, CSV rendering of plan
// outcomes and atomic file writes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "fuzzy.hpp"
#include "nexus.hpp"
#include "planner.hpp"

namespace nexusplan {

/// Unreadable, unwritable or ill-formed input/output.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_document(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte offset; translate it to line/column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw IoError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

// Typed field access that reports the JSON path on mismatch.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  Reader at(const std::string& key) const {
    require_object();
    if (!j_.contains(key)) throw IoError(path_ + "." + key + ": missing field");
    return {j_.at(key), path_ + "." + key};
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  void require_object() const {
    if (!j_.is_object()) throw IoError(path_ + ": expected an object");
  }
  // Rejects keys outside `known`, which catches misspelled fields.
  void only(std::initializer_list<const char*> known) const {
    require_object();
    for (const auto& [k, _] : j_.items()) {
      bool ok = false;
      for (const char* n : known) ok |= k == n;
      if (!ok) throw IoError(path_ + "." + k + ": unknown field");
    }
  }

  double number() const {
    if (!j_.is_number()) throw IoError(path_ + ": expected a number");
    return j_.get<double>();
  }
  std::string string() const {
    if (!j_.is_string()) throw IoError(path_ + ": expected a string");
    return j_.get<std::string>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) throw IoError(path_ + ": expected true or false");
    return j_.get<bool>();
  }
  std::vector<Reader> array() const {
    if (!j_.is_array()) throw IoError(path_ + ": expected an array");
    std::vector<Reader> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back({j_[i], path_ + "[" + std::to_string(i) + "]"});
    return out;
  }

  template <class T>
  void opt(const std::string& key, T& out) const;

 private:
  const json& j_;
  std::string path_;
};

inline TrapezoidalFuzzyNumber fuzzy_number(const Reader& r) {
  if (r.raw().is_number()) return TrapezoidalFuzzyNumber::crisp(r.number());
  const auto a = r.array();
  if (a.size() != 4) throw IoError(r.path() + ": fuzzy number needs 4 points [nu1,nu2,nu3,nu4]");
  try {
    return {a[0].number(), a[1].number(), a[2].number(), a[3].number()};
  } catch (const std::invalid_argument& e) {
    throw IoError(r.path() + ": " + e.what());
  }
}

inline ConstraintSense parse_sense(const Reader& r) {
  const auto s = r.string();
  if (s == "ge") return ConstraintSense::FuzzyGE;
  if (s == "le") return ConstraintSense::FuzzyLE;
  throw IoError(r.path() + ": sense must be \"ge\" or \"le\"");
}

// A bare fuzzy number guards the >= event; an object may choose the sense.
inline FuzzyParameter fuzzy_parameter(const Reader& r) {
  if (!r.raw().is_object()) return {fuzzy_number(r), ConstraintSense::FuzzyGE};
  r.only({"value", "sense"});
  FuzzyParameter p{fuzzy_number(r.at("value")), ConstraintSense::FuzzyGE};
  if (r.has("sense")) p.sense = parse_sense(r.at("sense"));
  return p;
}

template <class T>
void Reader::opt(const std::string& key, T& out) const {
  if (!has(key)) return;
  const auto r = at(key);
  if constexpr (std::is_same_v<T, double>) {
    out = r.number();
  } else if constexpr (std::is_same_v<T, bool>) {
    out = r.boolean();
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = r.string();
  } else if constexpr (std::is_same_v<T, FuzzyParameter>) {
    out = fuzzy_parameter(r);
  } else if constexpr (std::is_same_v<T, std::optional<double>>) {
    if (r.raw().is_null()) {
      out.reset();
    } else {
      out = r.number();
    }
  } else {
    static_assert(sizeof(T) == 0, "unsupported field type");
  }
}

}  // namespace detail

inline SystemProfile parse_profile(const nlohmann::json& doc, const std::string& origin = "profile") {
  using detail::Reader;
  const Reader root(doc, origin);
  root.only({"horizon", "generators", "batteries", "water", "wastewater", "transmission", "penalties",
             "uncertainty", "description"});
  SystemProfile p;
  {
    const double h = root.at("horizon").number();
    if (h != std::floor(h) || h < -1e9 || h > 1e9) throw IoError(origin + ".horizon: expected an integer");
    p.horizon = static_cast<int>(h);
  }
  if (root.has("generators"))
    for (const auto& g : root.at("generators").array()) {
      g.only({"name", "capacity_mw", "min_output_mw", "fuel_cost", "startup_cost", "water_withdrawal_gal_per_mwh",
              "capacity_deviation_mw", "initially_on"});
      Generator gen;
      gen.name = g.at("name").string();
      gen.capacity_mw = g.at("capacity_mw").number();
      g.opt("min_output_mw", gen.min_output_mw);
      gen.fuel_cost = g.at("fuel_cost").number();
      g.opt("startup_cost", gen.startup_cost);
      g.opt("water_withdrawal_gal_per_mwh", gen.water_withdrawal_gal_per_mwh);
      g.opt("capacity_deviation_mw", gen.capacity_deviation_mw);
      g.opt("initially_on", gen.initially_on);
      p.generators.push_back(gen);
    }
  if (root.has("batteries"))
    for (const auto& b : root.at("batteries").array()) {
      b.only({"name", "energy_capacity_mwh", "max_power_mw", "charge_efficiency", "discharge_efficiency",
              "initial_soc_fraction"});
      Battery bat;
      bat.name = b.at("name").string();
      bat.energy_capacity_mwh = b.at("energy_capacity_mwh").number();
      bat.max_power_mw = b.at("max_power_mw").number();
      b.opt("charge_efficiency", bat.charge_efficiency);
      b.opt("discharge_efficiency", bat.discharge_efficiency);
      b.opt("initial_soc_fraction", bat.initial_soc_fraction);
      p.batteries.push_back(bat);
    }
  if (root.has("water")) {
    const auto w = root.at("water");
    w.only({"extraction_capacity_mgal_h", "extraction_cost", "pumping_energy_mwh_per_mgal",
            "purification_capacity_mgal_h", "purification_energy_mwh_per_mgal", "purification_efficiency",
            "purification_cost"});
    w.opt("extraction_capacity_mgal_h", p.water.extraction_capacity_mgal_h);
    w.opt("extraction_cost", p.water.extraction_cost);
    w.opt("pumping_energy_mwh_per_mgal", p.water.pumping_energy_mwh_per_mgal);
    w.opt("purification_capacity_mgal_h", p.water.purification_capacity_mgal_h);
    w.opt("purification_energy_mwh_per_mgal", p.water.purification_energy_mwh_per_mgal);
    w.opt("purification_efficiency", p.water.purification_efficiency);
    w.opt("purification_cost", p.water.purification_cost);
  }
  if (root.has("wastewater")) {
    const auto w = root.at("wastewater");
    w.only({"treatment_capacity_mgal_h", "treatment_energy_mwh_per_mgal", "return_fraction", "treatment_cost"});
    w.opt("treatment_capacity_mgal_h", p.wastewater.treatment_capacity_mgal_h);
    w.opt("treatment_energy_mwh_per_mgal", p.wastewater.treatment_energy_mwh_per_mgal);
    w.opt("return_fraction", p.wastewater.return_fraction);
    w.opt("treatment_cost", p.wastewater.treatment_cost);
  }
  if (root.has("transmission")) {
    const auto t = root.at("transmission");
    t.only({"line_capacity_mw", "loss_fraction", "loss_deviation", "pipe_capacity_mgal_h"});
    t.opt("line_capacity_mw", p.transmission.line_capacity_mw);
    t.opt("loss_fraction", p.transmission.loss_fraction);
    t.opt("loss_deviation", p.transmission.loss_deviation);
    t.opt("pipe_capacity_mgal_h", p.transmission.pipe_capacity_mgal_h);
  }
  if (root.has("penalties")) {
    const auto pen = root.at("penalties");
    pen.only({"unmet_power", "unmet_water", "untreated_wastewater"});
    pen.opt("unmet_power", p.penalties.unmet_power);
    pen.opt("unmet_water", p.penalties.unmet_water);
    pen.opt("untreated_wastewater", p.penalties.untreated_wastewater);
  }
  if (root.has("uncertainty")) {
    const auto u = root.at("uncertainty");
    u.only({"fuzzy_charge_efficiency", "fuzzy_discharge_efficiency", "fuzzy_purification_efficiency",
            "ranged_generator_capacity", "ranged_transmission_loss"});
    u.opt("fuzzy_charge_efficiency", p.uncertainty.fuzzy_charge_efficiency);
    u.opt("fuzzy_discharge_efficiency", p.uncertainty.fuzzy_discharge_efficiency);
    u.opt("fuzzy_purification_efficiency", p.uncertainty.fuzzy_purification_efficiency);
    u.opt("ranged_generator_capacity", p.uncertainty.ranged_generator_capacity);
    u.opt("ranged_transmission_loss", p.uncertainty.ranged_transmission_loss);
  }
  return p;
}

inline SystemProfile load_profile(const std::filesystem::path& path) {
  return parse_profile(detail::parse_document(path), path.string());
}

/// Side-car series file: header row of column names, one numeric row per
/// period.
inline std::map<std::string, std::vector<double>> load_csv_columns(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    return out;
  };
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  const auto header = split(line);
  std::vector<std::vector<double>> cols(header.size());
  for (std::size_t row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw IoError(path.string() + ":" + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                    " fields, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size())
        throw IoError(path.string() + ":" + std::to_string(row) + ":" + std::to_string(c + 1) + ": not a number '" +
                      cells[c] + "'");
      cols[c].push_back(v);
    }
  }
  std::map<std::string, std::vector<double>> out;
  for (std::size_t c = 0; c < header.size(); ++c) out[header[c]] = std::move(cols[c]);
  return out;
}

/// `base_dir` resolves relative side-car CSV paths.
inline std::vector<Scenario> parse_scenarios(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                             const std::string& origin = "scenarios") {
  using detail::Reader;
  const Reader root(doc, origin);
  root.only({"scenarios", "description"});
  std::map<std::filesystem::path, std::map<std::string, std::vector<double>>> csv_cache;
  const auto series = [&](const Reader& r) -> std::vector<double> {
    if (r.raw().is_object()) {
      r.only({"csv", "column"});
      auto file = std::filesystem::path(r.at("csv").string());
      if (file.is_relative()) file = base_dir / file;
      auto it = csv_cache.find(file);
      if (it == csv_cache.end()) it = csv_cache.emplace(file, load_csv_columns(file)).first;
      const auto column = r.at("column").string();
      const auto col = it->second.find(column);
      if (col == it->second.end())
        throw IoError(r.path() + ": column '" + column + "' not found in " + file.string());
      return col->second;
    }
    std::vector<double> out;
    for (const auto& v : r.array()) out.push_back(v.number());
    return out;
  };
  std::vector<Scenario> out;
  for (const auto& s : root.at("scenarios").array()) {
    s.only({"name", "weight", "power_demand", "water_demand", "availability"});
    Scenario sc;
    sc.name = s.at("name").string();
    sc.weight = detail::fuzzy_number(s.at("weight"));
    sc.power_demand = series(s.at("power_demand"));
    sc.water_demand = series(s.at("water_demand"));
    if (s.has("availability")) {
      const auto a = s.at("availability");
      a.require_object();
      for (const auto& [k, _] : a.raw().items()) sc.availability[k] = a.at(k).number();
    }
    out.push_back(std::move(sc));
  }
  return out;
}

inline std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  return parse_scenarios(detail::parse_document(path), path.parent_path(), path.string());
}

/// 12 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per scenario plus an `expected_total` footer.
inline std::string render_run_csv(const PlanOutcome& o) {
  std::string out = "scenario,status,cost,weight_nu1,weight_nu2,weight_nu3,weight_nu4,crisp_weight,normalized_weight\n";
  for (const auto& s : o.scenarios) {
    out += csv_escape(s.name) + "," + std::string(to_string(s.status)) + "," +
           (s.cost ? format_number(*s.cost) : "") + "," + format_number(s.weight.nu1()) + "," +
           format_number(s.weight.nu2()) + "," + format_number(s.weight.nu3()) + "," +
           format_number(s.weight.nu4()) + "," + format_number(s.crisp_weight) + "," +
           format_number(s.normalized_weight) + "\n";
  }
  out += "expected_total," + std::string(to_string(o.status)) + "," +
         (o.expected_cost ? format_number(*o.expected_cost) : "") + ",,,,,,\n";
  return out;
}

/// Long form: one row per (alpha, gamma) cell, then one deterministic row
/// per alpha with an empty gamma.
inline std::string render_sweep_csv(const SweepGrid& grid) {
  std::string out = "alpha,gamma,expected_cost,status,model\n";
  const auto cost = [](const PlanOutcome& o) { return o.expected_cost ? format_number(*o.expected_cost) : ""; };
  for (std::size_t a = 0; a < grid.alphas.size(); ++a)
    for (std::size_t g = 0; g < grid.gammas.size(); ++g) {
      const auto& c = grid.at(a, g);
      out += format_number(grid.alphas[a]) + "," + format_number(grid.gammas[g]) + "," + cost(c) + "," +
             std::string(to_string(c.status)) + ",robust\n";
    }
  for (std::size_t a = 0; a < grid.baseline.size(); ++a) {
    const auto& b = grid.baseline[a];
    out += format_number(grid.alphas[a]) + ",," + cost(b) + "," + std::string(to_string(b.status)) +
           ",deterministic\n";
  }
  return out;
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace '" + path.string() + "': " + ec.message());
  }
}

}  // namespace nexusplan

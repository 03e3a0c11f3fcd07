#pragma once

// Fixed-format MPS export and a file-based adapter for external MILP
// solvers.
//
// Columns are written as C0000000.., rows as R0000000.. and the objective as
// COST, so every name fits the 8-character fixed fields regardless of the
// model's own labels.

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "milp.hpp"

namespace nexusplan {

namespace detail {

inline std::string mps_name(char prefix, std::size_t index) {
  if (index > 9'999'999) throw std::length_error("model too large for 8-character MPS names");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index);
  return buf;
}

}  // namespace detail

inline std::string mps_column_name(std::size_t j) { return detail::mps_name('C', j); }
inline std::string mps_row_name(std::size_t i) { return detail::mps_name('R', i); }

/// Most precise %g rendering that fits the 12-character numeric field. The
/// exponent is written without '+' or leading zeros to save room.
inline std::string mps_number(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in MPS output");
  char buf[40];
  for (int prec = 12; prec >= 1; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    std::string s = buf;
    if (const auto e = s.find('e'); e != std::string::npos) {
      std::string exp = s.substr(e + 1);
      const bool neg = exp[0] == '-';
      exp.erase(0, exp[0] == '-' || exp[0] == '+' ? 1 : 0);
      exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
      s = s.substr(0, e + 1) + (neg ? "-" : "") + exp;
    }
    // rounding up can push values near the double limit out of range
    if (s.size() <= 12 && std::isfinite(std::strtod(s.c_str(), nullptr))) return s;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  throw std::invalid_argument(std::string("value ") + buf + " does not fit an MPS field");
}

namespace detail {

inline std::string mps_field(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// " T  NAME1     NAME2     VALUE1        NAME3     VALUE2" with the
// classic column positions 2, 5, 15, 25, 40, 50.
inline std::string mps_line(const std::string& type, const std::string& n1, const std::string& n2 = "",
                            const std::string& v1 = "", const std::string& n3 = "", const std::string& v2 = "") {
  std::string line = " " + mps_field(type, 2) + " " + mps_field(n1, 8) + "  " + mps_field(n2, 8) + "  " +
                     mps_field(v1, 12) + "   " + mps_field(n3, 8) + "  " + v2;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line + "\n";
}

}  // namespace detail

inline std::string write_mps(const MilpProblem& p, const std::string& name = "NEXUS") {
  const std::size_t n = p.num_variables(), m = p.num_constraints();
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(n);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& t : p.constraints()[i].terms)
      if (t.coef != 0.0) cols[t.var.index].push_back({i, t.coef});

  std::string out = "NAME          " + name.substr(0, 8) + "\nROWS\n";
  out += detail::mps_line("N", "COST");
  for (std::size_t i = 0; i < m; ++i) {
    const auto s = p.constraints()[i].sense;
    out += detail::mps_line(s == RowSense::LE ? "L" : s == RowSense::GE ? "G" : "E", mps_row_name(i));
  }
  out += "COLUMNS\n";
  bool in_int = false;
  std::size_t marker = 0;
  const auto mark = [&](bool open) {
    char mk[16];
    std::snprintf(mk, sizeof mk, "MARKER%02zu", marker++ % 100);
    out += "    " + detail::mps_field(mk, 8) + "  'MARKER'                 " + (open ? "'INTORG'" : "'INTEND'") + "\n";
    in_int = open;
  };
  for (std::size_t j = 0; j < n; ++j) {
    const bool bin = p.variables()[j].kind == VarKind::Binary;
    if (bin != in_int) mark(bin);
    const auto col = mps_column_name(j);
    std::vector<std::pair<std::string, double>> entries;
    if (p.objective()[j] != 0.0 || cols[j].empty()) entries.push_back({"COST", p.objective()[j]});
    for (const auto& [i, c] : cols[j]) entries.push_back({mps_row_name(i), c});
    for (std::size_t k = 0; k < entries.size(); k += 2) {
      if (k + 1 < entries.size()) {
        out += detail::mps_line("", col, entries[k].first, mps_number(entries[k].second), entries[k + 1].first,
                                mps_number(entries[k + 1].second));
      } else {
        out += detail::mps_line("", col, entries[k].first, mps_number(entries[k].second));
      }
    }
  }
  if (in_int) mark(false);
  out += "RHS\n";
  for (std::size_t i = 0; i < m; ++i)
    if (p.constraints()[i].rhs != 0.0)
      out += detail::mps_line("", "RHS", mps_row_name(i), mps_number(p.constraints()[i].rhs));
  out += "BOUNDS\n";
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = p.variables()[j];
    const auto col = mps_column_name(j);
    const bool lo_inf = std::isinf(v.lower), up_inf = std::isinf(v.upper);
    if (!lo_inf && !up_inf && v.lower == v.upper) {
      out += detail::mps_line("FX", "BND", col, mps_number(v.lower));
    } else if (lo_inf && up_inf) {
      out += detail::mps_line("FR", "BND", col);
    } else {
      if (lo_inf) {
        out += detail::mps_line("MI", "BND", col);
      } else if (v.lower != 0.0 || (!up_inf && v.upper < 0.0)) {
        out += detail::mps_line("LO", "BND", col, mps_number(v.lower));
      }
      if (!up_inf) out += detail::mps_line("UP", "BND", col, mps_number(v.upper));
    }
  }
  out += "ENDATA\n";
  return out;
}

/// Parses a solution file of lines `status <s>`, `objective <v>` and
/// `<column> <value>`; unlisted columns are zero.
inline SolveResult parse_solution(const MilpProblem& p, const std::string& text) {
  SolveResult r;
  r.assignment.assign(p.num_variables(), 0.0);
  std::istringstream in(text);
  std::string line;
  bool have_status = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key) || key[0] == '#') continue;
    if (!(ls >> value)) throw std::runtime_error("solution line without value: '" + line + "'");
    std::string lower;
    for (char c : key) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "status") {
      std::string v;
      for (char c : value) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (v == "optimal") r.status = SolveStatus::Optimal;
      else if (v == "infeasible") r.status = SolveStatus::Infeasible;
      else if (v == "unbounded") r.status = SolveStatus::Unbounded;
      else if (v == "iterationlimit" || v == "limit") r.status = SolveStatus::IterationLimit;
      else throw std::runtime_error("unknown solution status '" + value + "'");
      have_status = true;
    } else if (lower == "objective") {
      continue;  // recomputed from the assignment
    } else {
      if (key.size() != 8 || key[0] != 'C') throw std::runtime_error("unknown column '" + key + "'");
      const auto j = std::stoul(key.substr(1));
      if (j >= p.num_variables()) throw std::runtime_error("unknown column '" + key + "'");
      r.assignment[j] = std::stod(value);
    }
  }
  if (!have_status) throw std::runtime_error("solution file has no status line");
  if (r.optimal()) r.objective = p.evaluate_objective(r.assignment);
  return r;
}

/// Runs `executable <model.mps> <solution.sol>` in a scratch directory and
/// reads back the solution. The reported assignment is checked against the
/// model before it is accepted.
inline SolveResult solve_external(const MilpProblem& p, const std::filesystem::path& executable,
                                  const SolverOptions& opt = {}) {
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  const auto dir = fs::temp_directory_path() /
                   ("nexusplan-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path d;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(d, ec);
    }
  } cleanup{dir};
  const auto model = dir / "model.mps", sol = dir / "solution.sol";
  {
    std::ofstream out(model);
    out << write_mps(p);
    if (!out) throw std::runtime_error("cannot write " + model.string());
  }
  const auto quote = [](const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
  };
  const auto cmd = quote(executable.string()) + " " + quote(model.string()) + " " + quote(sol.string());
  if (const int rc = std::system(cmd.c_str()); rc != 0)
    throw std::runtime_error("external solver exited with status " + std::to_string(rc));
  std::ifstream in(sol);
  if (!in) throw std::runtime_error("external solver wrote no solution file");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto r = parse_solution(p, ss.str());
  if (r.optimal()) {
    const auto rep = check_feasibility(p, r.assignment);
    if (!rep.ok(1e3 * opt.tol.feasibility, 1e3 * opt.tol.integrality))
      throw std::runtime_error("external solver returned an infeasible assignment");
  }
  return r;
}

}  // namespace nexusplan

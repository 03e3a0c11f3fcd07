// nexusplan: batch front end for validating nexus profiles, single
// expected-cost runs and (alpha, gamma) sweeps.
//
// Exit codes: 0 success, 1 domain failure, 2 input/output error,
// 3 solver resource limit.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nexusplan/nexusplan.hpp"

namespace {

using namespace nexusplan;

enum Exit { kOk = 0, kDomain = 1, kIo = 2, kLimit = 3 };

struct Config {
  std::string profile;
  std::string scenarios;
  std::vector<double> alphas;
  std::vector<double> gammas;
  std::string measure = "credibility";
  std::string out;
  std::optional<unsigned long> seed;  // reserved
  std::string external_solver;
  std::optional<double> weight_alpha;
  std::size_t max_pivots = SolverOptions{}.max_pivots;
  std::size_t max_nodes = SolverOptions{}.max_nodes;
  bool serial = false;
};

PlannerOptions planner_options(const Config& c) {
  PlannerOptions opt;
  opt.solver.max_pivots = c.max_pivots;
  opt.solver.max_nodes = c.max_nodes;
  opt.parallel = !c.serial;
  if (c.weight_alpha) opt.weight_alpha = ConfidenceLevel(*c.weight_alpha);
  if (!c.external_solver.empty()) {
    const std::string exe = c.external_solver;
    opt.milp_solver = [exe](const MilpProblem& p, const SolverOptions& so) { return solve_external(p, exe, so); };
  }
  return opt;
}

int report_violations(const SystemProfile& profile, const std::vector<Scenario>& scenarios) {
  auto v = validate_profile(profile);
  if (scenarios.empty()) v.push_back({"scenarios", "at least one scenario is required"});
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    auto s = validate_scenario(profile, scenarios[i], i);
    v.insert(v.end(), s.begin(), s.end());
  }
  for (const auto& x : v) std::cout << x.field << ": " << x.message << "\n";
  return v.empty() ? kOk : kDomain;
}

int cmd_validate(const Config& c) {
  const auto profile = load_profile(c.profile);
  const auto scenarios = load_scenarios(c.scenarios);
  return report_violations(profile, scenarios);
}

int exit_for(const PlanOutcome& o) {
  switch (o.status) {
    case OutcomeStatus::Ok: return kOk;
    case OutcomeStatus::SolverLimit: return kLimit;
    default: return kDomain;
  }
}

int cmd_run(const Config& c) {
  if (c.alphas.size() > 1 || c.gammas.size() > 1) {
    std::cerr << "run takes a single --alpha and --gamma; use sweep for grids\n";
    return kIo;
  }
  const auto profile = load_profile(c.profile);
  const auto scenarios = load_scenarios(c.scenarios);
  if (const int rc = report_violations(profile, scenarios); rc != kOk) return rc;
  const PlanRequest req{profile, scenarios, ConfidenceLevel(c.alphas.empty() ? 0.0 : c.alphas[0]),
                        RobustBudget(c.gammas.empty() ? 0.0 : c.gammas[0]), parse_measure(c.measure)};
  const auto o = expected_total_cost(req, planner_options(c));
  write_file_atomic(c.out, render_run_csv(o));
  for (const auto& s : o.scenarios)
    std::cout << s.name << ": " << to_string(s.status) << ", cost " << (s.cost ? format_number(*s.cost) : "-")
              << ", weight " << format_number(s.normalized_weight) << "\n";
  if (o.ok()) {
    std::cout << "expected total cost: " << format_number(*o.expected_cost) << "\n";
  } else {
    std::cerr << "run failed (" << to_string(o.status) << "): " << o.failure << "\n";
  }
  return exit_for(o);
}

int cmd_sweep(const Config& c) {
  const auto profile = load_profile(c.profile);
  const auto scenarios = load_scenarios(c.scenarios);
  if (const int rc = report_violations(profile, scenarios); rc != kOk) return rc;
  const std::vector<double> alphas = c.alphas.empty() ? std::vector<double>{0.0, 0.5} : c.alphas;
  const std::vector<double> gammas =
      c.gammas.empty() ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0} : c.gammas;
  const auto grid = sweep(profile, scenarios, alphas, gammas, parse_measure(c.measure), planner_options(c));
  write_file_atomic(c.out, render_sweep_csv(grid));

  std::size_t ok = 0, limits = 0;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    std::cout << "alpha " << format_number(alphas[a]) << ":";
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const auto& cell = grid.at(a, g);
      ok += cell.ok();
      limits += cell.status == OutcomeStatus::SolverLimit;
      std::cout << "  [" << format_number(gammas[g]) << "] "
                << (cell.ok() ? format_number(*cell.expected_cost) : std::string(to_string(cell.status)));
    }
    const auto& b = grid.baseline[a];
    std::cout << "  deterministic "
              << (b.ok() ? format_number(*b.expected_cost) : std::string(to_string(b.status))) << "\n";
  }
  if (ok > 0) return kOk;
  return limits == grid.cells.size() ? kLimit : kDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy-robust energy-water nexus planner"};
  app.require_subcommand(1);
  Config c;

  const auto common = [&c](CLI::App* sub, bool needs_out) {
    sub->add_option("--profile", c.profile, "System profile (JSON)")->required();
    sub->add_option("--scenarios", c.scenarios, "Scenario set (JSON)")->required();
    if (!needs_out) return;
    sub->add_option("--alpha", c.alphas, "Confidence level, repeatable")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--gamma", c.gammas, "Robust budget, repeatable")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--measure", c.measure, "possibility|necessity|credibility")
        ->check(CLI::IsMember({"possibility", "necessity", "credibility"}));
    sub->add_option("--out", c.out, "Output CSV path")->required();
    sub->add_option("--seed", c.seed, "Reserved; currently unused");
    sub->add_option("--external-solver", c.external_solver, "Executable solving <model.mps> <solution.sol>");
    sub->add_option("--weight-alpha", c.weight_alpha, "Confidence level for weight defuzzification")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--max-pivots", c.max_pivots, "Simplex pivot budget per LP");
    sub->add_option("--max-nodes", c.max_nodes, "Branch-and-bound node budget per MILP");
    sub->add_flag("--serial", c.serial, "Solve scenarios one at a time");
  };
  auto* validate = app.add_subcommand("validate", "Check a profile and scenario set");
  auto* run = app.add_subcommand("run", "Expected total cost at one (alpha, gamma)");
  auto* sweep_cmd = app.add_subcommand("sweep", "Expected total cost over an (alpha, gamma) grid");
  common(validate, false);
  common(run, true);
  common(sweep_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kIo;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*run) return cmd_run(c);
    return cmd_sweep(c);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
}

// Command-line front end: run scenarios, sweep parameters, reproduce the
// reference tables and audit power balance of a CSV.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "microgrid/report.hpp"
#include "microgrid/simulation.hpp"
#include "microgrid/sweep.hpp"

namespace mg = microgrid;

namespace {

constexpr int kOk = 0;
constexpr int kAssertionFailed = 1;
constexpr int kUsage = 2;

std::string scenario_hash(const mg::Scenario& s, const std::string& source) {
  std::string key = source + '|' + std::string(mg::to_string(s.sim.integrator.method)) + '|' +
                    mg::format_number(s.sim.integrator.dt) + '|' + mg::format_number(s.sim.t_end);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016zx", std::hash<std::string>{}(key));
  return buf;
}

void write_or_print(const mg::Table& table, const std::string& out) {
  if (out.empty()) {
    mg::write_csv(table, std::cout);
  } else {
    mg::write_csv(table, std::filesystem::path(out));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phasor-domain microgrid simulator"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::string out;

  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write its time series as CSV");
  run_cmd->add_option("scenario", scenario_arg, "Scenario file or bundled fixture name")->required();
  run_cmd->add_option("--out", out, "Output CSV (stdout when omitted); metadata goes to <out>.meta.json");
  std::optional<double> dt, t_end;
  std::string method;
  run_cmd->add_option("--dt", dt, "Integrator step in seconds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--t-end", t_end, "Simulated time in seconds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--method", method, "Integration method")->check(CLI::IsMember({"rk4", "rk23"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Steady state across values of one scenario parameter");
  std::string param;
  std::vector<double> values;
  bool dynamic = false;
  sweep_cmd->add_option("scenario", scenario_arg, "Scenario file or bundled fixture name")->required();
  sweep_cmd->add_option("--param", param, "Parameter path, e.g. load.main.r")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_flag("--dynamic", dynamic, "Run each point in time instead of solving the equilibrium");
  sweep_cmd->add_option("--out", out, "Output CSV (stdout when omitted)");

  auto* report_cmd = app.add_subcommand("report", "Reproduce a reference table and check its trends");
  std::string table;
  report_cmd->add_option("table", table, "Table name")->required()->check(CLI::IsMember(mg::table_names()));
  report_cmd->add_option("scenario", scenario_arg, "Scenario file or bundled fixture name")->required();

  auto* balance_cmd = app.add_subcommand("balance", "Check source/load power balance of a run CSV");
  std::string csv;
  double after = 3.0;
  double tol = 1e-3;
  balance_cmd->add_option("csv", csv, "CSV written by run")->required();
  balance_cmd->add_option("--after", after, "Skip samples up to this time (s)");
  balance_cmd->add_option("--tol", tol, "Relative residual tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      auto s = mg::load_scenario(scenario_arg);
      if (dt) s.sim.integrator.dt = *dt;
      if (t_end) s.sim.t_end = *t_end;
      if (!method.empty()) s.sim.integrator.method = method == "rk4" ? mg::IntegrationMethod::rk4 : mg::IntegrationMethod::rk23;
      if (auto issues = mg::validate(s); !issues.empty()) throw mg::ValidationError(std::move(issues));
      auto ts = mg::run(s);
      ts.metadata["scenario_hash"] = scenario_hash(s, scenario_arg);
      if (out.empty()) {
        mg::write_csv(ts, std::cout);
      } else {
        mg::write_csv(ts, std::filesystem::path(out));
        mg::write_metadata(ts, out + ".meta.json");
      }
      return kOk;
    }
    if (*sweep_cmd) {
      const auto s = mg::load_scenario(scenario_arg);
      const auto r = mg::sweep(s, param, values, dynamic ? mg::SweepMode::dynamic : mg::SweepMode::equilibrium);
      write_or_print(r.table, out);
      return kOk;
    }
    if (*report_cmd) {
      const auto s = mg::load_scenario(scenario_arg);
      const auto rep = mg::table_report(table, s);
      mg::print(std::cout, rep);
      return rep.passed() ? kOk : kAssertionFailed;
    }
    if (*balance_cmd) {
      const auto ts = mg::read_csv(std::filesystem::path(csv));
      const auto rep = mg::balance_report(ts, after);
      mg::print(std::cout, rep, tol);
      const bool ok = !rep.times.empty() && rep.max_p_residual <= tol && rep.max_q_residual <= tol;
      if (rep.times.empty()) std::cerr << "no samples after t = " << after << " s\n";
      return ok ? kOk : kAssertionFailed;
    }
  } catch (const mg::ValidationError& e) {
    std::cerr << "invalid scenario:\n";
    for (const auto& issue : e.issues())
      std::cerr << "  " << (issue.line > 0 ? "line " + std::to_string(issue.line) + ": " : "") << issue.message << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

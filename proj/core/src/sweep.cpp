#include "microgrid/sweep.hpp"

#include <future>

#include "microgrid/simulation.hpp"

namespace microgrid {

std::vector<double> steady_row(const Scenario& scenario, SweepMode mode) {
  std::vector<double> row;
  if (mode == SweepMode::dynamic) {
    row = steady_state(run(scenario).table());
  } else {
    const double t = scenario.sim.t_end;
    row = equilibrium_row(scenario, solve_steady_state(scenario, t), t);
  }
  row.erase(row.begin());
  return row;
}

SweepResult sweep(const Scenario& base, std::string_view parameter, std::span<const double> values,
                  SweepMode mode) {
  SweepResult out;
  out.parameter = std::string(parameter);
  out.table.columns.push_back(out.parameter);
  const auto cols = measurement_columns(base);
  out.table.columns.insert(out.table.columns.end(), cols.begin() + 1, cols.end());

  std::vector<Scenario> points;
  for (double v : values) {
    Scenario s = base;
    set_parameter(s, parameter, v);
    const auto issues = validate(s);
    if (!issues.empty()) throw ValidationError(issues);
    points.push_back(std::move(s));
  }

  std::vector<std::future<std::vector<double>>> jobs;
  jobs.reserve(points.size());
  for (const auto& s : points)
    jobs.push_back(std::async(std::launch::async, [&s, mode] { return steady_row(s, mode); }));

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto row = jobs[i].get();
    row.insert(row.begin(), values[i]);
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace microgrid

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "microgrid/scenario.hpp"
#include "microgrid/sweep.hpp"
#include "microgrid/timeseries.hpp"

namespace microgrid {

/// Active and reactive balance between source columns (grid, machine and
/// wind ".P"/".Q") and load columns, per timestamp after the transient
/// window. Relative residuals divide by the larger of the total load and
/// the largest single source (at least 1 W or var).
struct BalanceReport {
  double after = 0.0;
  std::vector<double> times;
  std::vector<double> p_source;
  std::vector<double> p_load;
  std::vector<double> q_source;
  std::vector<double> q_load;
  std::vector<double> p_residual;
  std::vector<double> q_residual;
  double max_p_residual = 0.0;
  double max_q_residual = 0.0;
};

/// Rows with t > after contribute; the default window is three inertia
/// constants of the bundled machines.
BalanceReport balance_report(const TimeSeries& ts, double after = 3.0);

void print(std::ostream& out, const BalanceReport& report, double tolerance);

struct TableCheck {
  std::string description;
  bool passed = false;
  std::string detail;
};

struct TableReport {
  std::string name;
  std::string title;
  /// Swept value, our results, and the published reference values.
  Table table;
  std::vector<TableCheck> checks;
  /// Reference magnitudes outside the display band; informational only.
  std::vector<std::string> band_notes;

  bool passed() const;
};

/// Names accepted by table_report.
std::vector<std::string> table_names();

/// Runs the table's sweep on the given scenario and evaluates its
/// assertions. Throws std::invalid_argument for an unknown table or a
/// scenario without the devices the table needs.
TableReport table_report(std::string_view name, const Scenario& scenario);

void print(std::ostream& out, const TableReport& report);

}  // namespace microgrid

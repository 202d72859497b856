#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "microgrid/scenario.hpp"
#include "microgrid/timeseries.hpp"

namespace microgrid {

enum class SweepMode {
  /// Algebraic steady state of the configuration at t_end.
  equilibrium,
  /// Full run, reported as the mean of the final 10% of samples.
  dynamic,
};

/// Result table: the swept value in the first column (named by the
/// parameter path), then the run's measurement columns without t. Rows are
/// in input order.
struct SweepResult {
  std::string parameter;
  Table table;

  double at(std::size_t row, std::string_view column) const { return table.rows.at(row)[table.column(column)]; }
};

/// Evaluates each value independently (concurrently). Throws
/// std::invalid_argument when the path does not resolve.
SweepResult sweep(const Scenario& base, std::string_view parameter, std::span<const double> values,
                  SweepMode mode = SweepMode::equilibrium);

/// One steady-state row of measurement columns (without t) for a scenario.
std::vector<double> steady_row(const Scenario& scenario, SweepMode mode);

}  // namespace microgrid

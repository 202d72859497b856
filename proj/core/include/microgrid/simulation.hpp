#pragma once

#include <string>
#include <vector>

#include "microgrid/equilibrium.hpp"
#include "microgrid/scenario.hpp"
#include "microgrid/timeseries.hpp"

namespace microgrid {

/// Output columns of a run, in order: t, f_hz, v_bus_ll, then P/Q/I per
/// device (grid, machines, loads, wind) with machine delta_deg (load angle),
/// omega (mechanical rad/s), flux and pm, and the wind active current id.
std::vector<std::string> measurement_columns(const Scenario& scenario);

/// Integrates the scenario from 0 to t_end. Every event is applied at its
/// exact time and recorded. Network and integrator failures surface as
/// SimulationError carrying the time.
TimeSeries run(const Scenario& scenario);

/// Algebraic steady state of the configuration reached at time t (events up
/// to t applied, converter currents at t).
EquilibriumResult solve_steady_state(const Scenario& scenario, double t);

/// The equilibrium expressed as a row of measurement_columns, stamped t.
std::vector<double> equilibrium_row(const Scenario& scenario, const EquilibriumResult& result, double t);

}  // namespace microgrid

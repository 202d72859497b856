#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "microgrid/equilibrium.hpp"
#include "microgrid/errors.hpp"
#include "microgrid/integrator.hpp"
#include "microgrid/machine.hpp"
#include "microgrid/network.hpp"
#include "microgrid/wind.hpp"

namespace microgrid {

enum class FrequencyMode { const_power, speed_ref, droop };
enum class AvrMode { pi, fixed, droop };
enum class InitMode { flat, steady };

struct SimSettings {
  double t_end = 1.0;
  IntegratorConfig integrator;
  double output_interval = 0.01;
  /// flat: machines start at their configured angle, synchronous speed and
  /// initial flux. steady: start from the algebraic equilibrium.
  InitMode init = InitMode::flat;
};

struct GridSpec {
  GridSourceParams params;
  int line = 0;
};

struct MachineSpec {
  std::string id;
  MachineParams params;

  FrequencyMode mode = FrequencyMode::const_power;
  double p_mech = 0.0;            // W
  std::optional<double> f0;       // Hz, speed reference and droop no-load frequency
  double m_droop = 0.01;          // pu/pu
  double p_nominal = 0.0;         // W

  AvrMode avr = AvrMode::pi;
  std::optional<double> v0;       // V phase RMS, regulator setpoint and droop no-load voltage
  double n_droop = 0.01;          // V/var
  double q0 = 0.0;                // var

  std::optional<double> flux0;    // Wb
  double delta0_deg = 0.0;
  ControllerGains gains;
  int line = 0;

  double reference_frequency() const noexcept { return f0.value_or(params.f_rated); }
  double voltage_setpoint() const noexcept { return v0.value_or(params.v_base()); }
  double initial_flux() const noexcept { return flux0.value_or(params.nominal_flux()); }
  MachineMode control() const;
};

struct LoadSpec {
  std::string id;
  RLLoadParams params;
  int line = 0;
};

struct WindSpec {
  std::string id;
  double id_rms = 0.0;
  double iq_rms = 0.0;
  bool connected = true;
  std::string series_file;
  /// When present, the active current follows the series through the mapping
  /// and id_rms is ignored.
  std::optional<WindSeries> series;
  WindMapping mapping;
  int line = 0;

  WindCurrent current_at(double t) const;
};

enum class EventAction { close_switch, open_switch, set_mech_power, set_iq, set_id };

std::string_view to_string(EventAction action) noexcept;

struct Event {
  std::string name;
  double time = 0.0;
  EventAction action = EventAction::close_switch;
  std::string target;
  double value = 0.0;
  int line = 0;
};

struct Scenario {
  std::string name;
  SimSettings sim;
  std::optional<GridSpec> grid;
  std::vector<MachineSpec> machines;
  std::vector<LoadSpec> loads;
  std::vector<WindSpec> winds;
  /// Sorted by time; declaration order is kept among equal times.
  std::vector<Event> events;

  /// Frequency of the phasor frame: the grid's, else the first speed
  /// reference machine's, else the first machine's rating.
  double frame_frequency() const;

  const MachineSpec* find_machine(std::string_view id) const;

  /// Copy with every event at or before t applied.
  Scenario at_time(double t) const;

  /// Network for the current switch states, with machines and wind devices
  /// in declaration order.
  NetworkModel build_network() const;

  std::vector<WindCurrent> wind_currents(double t) const;

  /// Steady-state problem for the configuration as it stands (apply
  /// at_time first to include events), with converter currents at time t.
  EquilibriumProblem equilibrium_problem(double t = 0.0) const;
};

/// Applies one event to the scenario's device settings.
void apply_event(Scenario& scenario, const Event& event);

/// Checks cross-references and ratings; returns every problem found.
std::vector<Issue> validate(const Scenario& scenario);

/// Parses the sectioned key=value format. Relative series_file paths resolve
/// against base_dir. Throws ValidationError listing every problem.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

/// Loads a scenario from a file, or a bundled fixture by name ("fig3_1").
Scenario load_scenario(std::string_view name_or_path);

/// Path of a bundled fixture, searching $MICROGRID_FIXTURES, the source tree
/// and the install prefix. Throws std::invalid_argument when not found.
std::filesystem::path find_fixture(std::string_view name);

/// Sets a numeric field addressed as "<section>.<key>" or
/// "<section>.<id>.<key>", e.g. "load.main.r" or "machine.sg1.n_droop".
/// Throws std::invalid_argument when the path does not resolve.
void set_parameter(Scenario& scenario, std::string_view path, double value);

}  // namespace microgrid

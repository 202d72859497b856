#pragma once

#include <cstddef>
#include <span>
#include <variant>

#include "microgrid/phasor.hpp"

namespace microgrid {

/// Ratings and electrical/mechanical constants of a cylindrical-rotor
/// synchronous generator using the classical EMF-behind-reactance model.
struct MachineParams {
  double s_rated = 1.5e6;      // VA
  double v_rated_ll = 11e3;    // V, line-to-line RMS
  double f_rated = 50.0;       // Hz
  int poles = 4;
  double xs = 88.6;            // ohm, synchronous reactance
  double h_inertia = 1.0;      // s
  double d_damping = 20.0;     // pu torque per pu slip
  double flux_nominal = 0.0;   // Wb; 0 derives it from the rated voltage

  /// Throws std::invalid_argument when a rating is non-positive or the pole
  /// count is odd or below two.
  void validate() const;

  double v_base() const noexcept { return line_to_phase(v_rated_ll); }
  /// Rated synchronous rotor speed, mechanical rad/s.
  double omega_sync_mech() const noexcept;
  /// Rated synchronous speed, electrical rad/s.
  double omega_sync_elec() const noexcept { return 2.0 * kPi * f_rated; }
  /// Flux that produces rated phase voltage at no load and rated speed,
  /// unless flux_nominal overrides it.
  double nominal_flux() const noexcept;
};

/// Time constants and gains for the excitation and speed controllers.
struct ControllerGains {
  double kp_avr = 4.0;        // pu flux per pu voltage error
  double ki_avr = 10.0;       // pu flux per pu voltage error per second
  double t_field = 0.5;       // s, flux lag behind the regulator command
  double t_governor = 0.1;    // s, prime-mover lag of the droop governor
  double tau_speed = 1e-3;    // s, speed tracker of a speed-reference machine
};

struct ConstantPower {
  double p_mech;  // W
};

struct SpeedReference {
  double omega_ref;  // mechanical rad/s
};

/// Active power-frequency droop, f = f0 - m * (P - P_nominal), with m in
/// per-unit frequency per per-unit power on the machine rating.
struct DroopGovernor {
  double f0;
  double m;
  double p_nominal = 0.0;  // W
};

using FrequencyControl = std::variant<ConstantPower, SpeedReference, DroopGovernor>;

struct FixedFlux {
  double flux;  // Wb
};

/// PI regulation of the terminal voltage magnitude.
struct VoltageRegulator {
  double v_ref;  // V, phase RMS
};

/// Reactive power-voltage droop, V = V0 - n * (Q - Q0), with V the phase RMS
/// voltage in volts, Q the three-phase reactive output in var and n in V/var.
struct VoltageDroop {
  double v0;
  double n;
  double q0 = 0.0;
};

using VoltageControl = std::variant<FixedFlux, VoltageRegulator, VoltageDroop>;

struct MachineMode {
  FrequencyControl frequency;
  VoltageControl voltage;
};

/// Dynamic state. delta is the electrical angle of the internal EMF in the
/// network frame (unwrapped), omega the mechanical rotor speed.
struct MachineState {
  static constexpr std::size_t kSize = 5;

  double delta = 0.0;      // rad
  double omega = 0.0;      // mechanical rad/s
  double flux = 0.0;       // Wb
  double governor = 0.0;   // W, mechanical power held by the governor
  double avr_integ = 0.0;  // Wb, integral part of the flux command

  static MachineState from(std::span<const double> x) noexcept;
  void store(std::span<double> x) const noexcept;
};

struct SyncSpeed {
  double rpm;
  double rad_per_s;
};

/// Ns = 120 f / P. Throws std::invalid_argument for non-positive f or an odd
/// or non-positive pole count.
SyncSpeed sync_speed(double f, int poles);

constexpr double electrical_speed(double omega_mech, int poles) noexcept {
  return omega_mech * 0.5 * static_cast<double>(poles);
}

/// Per-phase RMS internal EMF for an electrical speed and flux (peak flux
/// linkage times speed gives the peak EMF).
double emf_magnitude(double omega_e, double flux) noexcept;

/// Ef / Isc; throws std::invalid_argument when isc_rms <= 0.
double xs_from_short_circuit(double ef_rms, double isc_rms);

/// Open-circuit EMF and short-circuit current of the model at a given flux
/// and rotor speed, reported in both conventions that appear in practice.
struct ShortCircuitTest {
  double ef_rms;
  double isc_rms;
  double isc_peak;
  double xs_rms;    // ef_rms / isc_rms
  double xs_mixed;  // ef_rms / isc_peak
};

ShortCircuitTest short_circuit_test(const MachineParams& params, double flux, double omega_mech);

/// P = 3 Vt Ef sin(delta) / Xs (three-phase watts).
double electrical_power_delta(double vt, double ef, double xs, double delta) noexcept;

/// Internal EMF E = emf(omega, flux) at angle delta behind jXs, as a Norton
/// source. Terminal current is injection - admittance * V_bus.
NortonEquivalent machine_norton(const MachineState& state, const MachineParams& params) noexcept;

/// Frame information the swing equation needs from the network.
struct SystemFrame {
  double omega_frame_e;   // rotation of the phasor frame, electrical rad/s
  double omega_system_e;  // network frequency the damper torque acts against
};

struct SwingRates {
  double d_delta;
  double d_omega;
  double d_governor;
};

/// Mechanical power currently applied by the prime mover.
double mechanical_power(const MachineState& state, const FrequencyControl& control) noexcept;

/// Power the droop governor settles to at electrical frequency f.
double governor_power_target(const DroopGovernor& droop, double f, const MachineParams& params) noexcept;

/// Voltage reference of the reactive power droop at output q.
double voltage_droop_reference(const VoltageDroop& droop, double q) noexcept;

/// Rotor and governor derivatives given the electrical output pe (W).
SwingRates swing_derivatives(const MachineState& state, double pe, const MachineParams& params,
                             const FrequencyControl& control, const ControllerGains& gains,
                             const SystemFrame& frame) noexcept;

struct ExcitationRates {
  double d_flux;
  double d_avr_integ;
};

/// Flux derivatives of the excitation system given the terminal voltage
/// magnitude (phase RMS) and reactive output (var).
ExcitationRates avr_derivatives(const MachineState& state, double v_terminal, double q_machine,
                                const MachineParams& params, const VoltageControl& control,
                                const ControllerGains& gains) noexcept;

/// (no_load - full_load) / full_load; throws std::invalid_argument when
/// full_load <= 0.
double speed_droop_ratio(double no_load, double full_load);

}  // namespace microgrid

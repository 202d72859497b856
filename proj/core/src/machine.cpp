#include "microgrid/machine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace microgrid {

void MachineParams::validate() const {
  if (!(s_rated > 0.0)) throw std::invalid_argument("machine s_rated must be positive");
  if (!(v_rated_ll > 0.0)) throw std::invalid_argument("machine v_ll must be positive");
  if (!(f_rated > 0.0)) throw std::invalid_argument("machine rated frequency must be positive");
  if (poles < 2 || poles % 2 != 0) throw std::invalid_argument("machine poles must be even and >= 2");
  if (!(xs > 0.0)) throw std::invalid_argument("machine xs must be positive");
  if (!(h_inertia > 0.0)) throw std::invalid_argument("machine inertia h must be positive");
  if (d_damping < 0.0) throw std::invalid_argument("machine damping d must be non-negative");
  if (flux_nominal < 0.0) throw std::invalid_argument("machine flux_nominal must be non-negative");
}

double MachineParams::omega_sync_mech() const noexcept {
  return omega_sync_elec() * 2.0 / static_cast<double>(poles);
}

double MachineParams::nominal_flux() const noexcept {
  if (flux_nominal > 0.0) return flux_nominal;
  return rms_to_peak(v_base()) / omega_sync_elec();
}

MachineState MachineState::from(std::span<const double> x) noexcept {
  return {x[0], x[1], x[2], x[3], x[4]};
}

void MachineState::store(std::span<double> x) const noexcept {
  x[0] = delta;
  x[1] = omega;
  x[2] = flux;
  x[3] = governor;
  x[4] = avr_integ;
}

SyncSpeed sync_speed(double f, int poles) {
  if (!(f > 0.0)) throw std::invalid_argument("frequency must be positive");
  if (poles < 2 || poles % 2 != 0) throw std::invalid_argument("pole count must be even and >= 2");
  const double rpm = 120.0 * f / static_cast<double>(poles);
  return {rpm, rpm * 2.0 * kPi / 60.0};
}

double emf_magnitude(double omega_e, double flux) noexcept { return peak_to_rms(omega_e * flux); }

double xs_from_short_circuit(double ef_rms, double isc_rms) {
  if (!(isc_rms > 0.0)) throw std::invalid_argument("short-circuit current must be positive");
  return ef_rms / isc_rms;
}

ShortCircuitTest short_circuit_test(const MachineParams& params, double flux, double omega_mech) {
  params.validate();
  const double ef = emf_magnitude(electrical_speed(omega_mech, params.poles), flux);
  // Terminals shorted: the whole EMF drops across jXs.
  const double isc = std::abs(Phasor(ef, 0.0) / Complex(0.0, params.xs));
  ShortCircuitTest r{};
  r.ef_rms = ef;
  r.isc_rms = isc;
  r.isc_peak = rms_to_peak(isc);
  r.xs_rms = xs_from_short_circuit(ef, isc);
  r.xs_mixed = xs_from_short_circuit(ef, r.isc_peak);
  return r;
}

double electrical_power_delta(double vt, double ef, double xs, double delta) noexcept {
  return 3.0 * vt * ef * std::sin(delta) / xs;
}

NortonEquivalent machine_norton(const MachineState& state, const MachineParams& params) noexcept {
  const double ef = emf_magnitude(electrical_speed(state.omega, params.poles), state.flux);
  const Complex admittance = 1.0 / Complex(0.0, params.xs);
  return {std::polar(ef, state.delta) * admittance, admittance};
}

double mechanical_power(const MachineState& state, const FrequencyControl& control) noexcept {
  if (const auto* cp = std::get_if<ConstantPower>(&control)) return cp->p_mech;
  return state.governor;
}

double governor_power_target(const DroopGovernor& droop, double f, const MachineParams& params) noexcept {
  return droop.p_nominal + (droop.f0 - f) / (droop.m * params.f_rated) * params.s_rated;
}

double voltage_droop_reference(const VoltageDroop& droop, double q) noexcept {
  return droop.v0 - droop.n * (q - droop.q0);
}

SwingRates swing_derivatives(const MachineState& state, double pe, const MachineParams& params,
                             const FrequencyControl& control, const ControllerGains& gains,
                             const SystemFrame& frame) noexcept {
  SwingRates rates{};
  const double omega_e = electrical_speed(state.omega, params.poles);
  rates.d_delta = omega_e - frame.omega_frame_e;

  if (const auto* speed = std::get_if<SpeedReference>(&control)) {
    rates.d_omega = (speed->omega_ref - state.omega) / gains.tau_speed;
    return rates;
  }

  const double omega_s = params.omega_sync_mech();
  const double omega_system = frame.omega_system_e * 2.0 / static_cast<double>(params.poles);
  const double pm = mechanical_power(state, control);
  const double damping = params.d_damping * params.s_rated * (state.omega - omega_system) / omega_s;
  rates.d_omega = omega_s / (2.0 * params.h_inertia * params.s_rated) * (pm - pe - damping);

  if (const auto* droop = std::get_if<DroopGovernor>(&control)) {
    const double f = omega_e / (2.0 * kPi);
    rates.d_governor = (governor_power_target(*droop, f, params) - state.governor) / gains.t_governor;
  }
  return rates;
}

ExcitationRates avr_derivatives(const MachineState& state, double v_terminal, double q_machine,
                                const MachineParams& params, const VoltageControl& control,
                                const ControllerGains& gains) noexcept {
  if (const auto* fixed = std::get_if<FixedFlux>(&control))
    return {(fixed->flux - state.flux) / gains.t_field, 0.0};

  double v_ref = 0.0;
  if (const auto* reg = std::get_if<VoltageRegulator>(&control)) {
    v_ref = reg->v_ref;
  } else {
    v_ref = voltage_droop_reference(std::get<VoltageDroop>(control), q_machine);
  }

  const double flux_base = params.nominal_flux();
  const double flux_max = 2.0 * flux_base;
  const double error = (v_ref - v_terminal) / params.v_base();
  const double command = std::clamp(state.avr_integ + gains.kp_avr * error * flux_base, 0.0, flux_max);

  double d_integ = gains.ki_avr * error * flux_base;
  // Conditional integration keeps the integrator inside the flux limits.
  if ((state.avr_integ >= flux_max && d_integ > 0.0) || (state.avr_integ <= 0.0 && d_integ < 0.0))
    d_integ = 0.0;
  return {(command - state.flux) / gains.t_field, d_integ};
}

double speed_droop_ratio(double no_load, double full_load) {
  if (!(full_load > 0.0)) throw std::invalid_argument("full-load speed must be positive");
  return (no_load - full_load) / full_load;
}

}  // namespace microgrid

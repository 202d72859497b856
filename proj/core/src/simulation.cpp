#include "microgrid/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace microgrid {
namespace {

constexpr double kRadToDeg = 180.0 / kPi;

double initial_omega(const MachineSpec& m, double frame_f) {
  if (m.mode == FrequencyMode::speed_ref) return sync_speed(m.reference_frequency(), m.params.poles).rad_per_s;
  return 2.0 * kPi * frame_f * 2.0 / static_cast<double>(m.params.poles);
}

/// Row assembly shared by the dynamic run and the equilibrium view.
std::vector<double> make_row(const Scenario& s, const NetworkModel& net, const NetworkSolution& sol,
                             std::span<const MachineState> states, std::span<const WindCurrent> wind, double t,
                             double f_hz) {
  std::vector<double> row;
  row.reserve(measurement_columns(s).size());
  row.push_back(t);
  row.push_back(f_hz);
  const Phasor v = sol.bus_voltages.at(0);
  row.push_back(phase_to_line(std::abs(v)));

  auto reading = [&](std::string_view id) -> const DeviceReading& { return sol.devices[*net.find(id)]; };
  auto push_piq = [&](const DeviceReading& r) {
    row.push_back(r.power.p_active);
    row.push_back(r.power.q_reactive);
    row.push_back(r.power.i_rms_phase);
  };

  if (s.grid) push_piq(reading("grid"));
  for (std::size_t i = 0; i < s.machines.size(); ++i) {
    const auto& m = s.machines[i];
    const auto& st = states[i];
    push_piq(reading(m.id));
    const double ef = emf_magnitude(electrical_speed(st.omega, m.params.poles), st.flux);
    const Phasor e = std::polar(ef, st.delta);
    const double angle = std::abs(v) > 0.0 && ef > 0.0 ? std::arg(e / v) : 0.0;
    row.push_back(angle * kRadToDeg);
    row.push_back(st.omega);
    row.push_back(st.flux);
    row.push_back(mechanical_power(st, m.control().frequency));
  }
  for (const auto& l : s.loads) push_piq(reading(l.id));
  for (std::size_t i = 0; i < s.winds.size(); ++i) {
    push_piq(reading(s.winds[i].id));
    row.push_back(i < wind.size() ? wind[i].id_rms : 0.0);
  }
  return row;
}

class Simulator {
 public:
  explicit Simulator(const Scenario& scenario)
      : base_(scenario), current_(scenario), net_(scenario.build_network()), frame_f_(scenario.frame_frequency()) {
    refresh_controls();
    states_.resize(current_.machines.size());
    injections_.resize(current_.machines.size());
  }

  TimeSeries run() {
    const double t_end = base_.sim.t_end;

    // Scenario events first, then wind samples as plain breakpoints.
    struct Mark {
      double time;
      int event;
    };
    std::vector<Mark> marks;
    for (std::size_t i = 0; i < base_.events.size(); ++i)
      marks.push_back({base_.events[i].time, static_cast<int>(i)});
    for (const auto& w : base_.winds)
      if (w.series)
        for (const auto& sample : w.series->samples)
          if (sample.time > 0.0 && sample.time < t_end) marks.push_back({sample.time, -1});
    std::stable_sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) { return a.time < b.time; });
    std::vector<double> times;
    for (const auto& m : marks) times.push_back(m.time);

    StateVector x0 = initial_state();

    TimeSeries ts(measurement_columns(base_));
    IntegrationOptions opts;
    opts.output_interval = base_.sim.output_interval;
    opts.event_times = times;
    opts.store_states = false;
    opts.on_event = [&](std::size_t index, double t, StateVector&) {
      if (marks[index].event >= 0) apply(base_.events[static_cast<std::size_t>(marks[index].event)], t);
    };
    opts.observer = [&](double t, std::span<const double> x) { ts.append(measure(t, x)); };

    const DerivativeFn deriv = [this](double t, std::span<const double> x, std::span<double> dx) {
      derivatives(t, x, dx);
    };

    try {
      integrate(deriv, std::move(x0), 0.0, t_end, base_.sim.integrator, opts);
    } catch (const IntegrationError& e) {
      throw SimulationError(e.what(), e.time());
    }

    std::ostringstream settings;
    settings << to_string(base_.sim.integrator.method) << " dt=" << base_.sim.integrator.dt
             << " rel_tol=" << base_.sim.integrator.rel_tol << " abs_tol=" << base_.sim.integrator.abs_tol
             << " output_interval=" << base_.sim.output_interval << " t_end=" << t_end;
    ts.metadata["scenario"] = base_.name;
    ts.metadata["solver"] = settings.str();
    return ts;
  }

 private:
  StateVector initial_state() {
    // Events scheduled at t = 0 shape the starting point.
    Scenario at0 = base_.at_time(0.0);
    StateVector x(MachineState::kSize * base_.machines.size());
    if (base_.sim.init == InitMode::steady && !base_.machines.empty()) {
      const auto eq = solve_steady_state(base_, 0.0);
      for (std::size_t i = 0; i < eq.states.size(); ++i)
        eq.states[i].store(std::span<double>(x).subspan(i * MachineState::kSize, MachineState::kSize));
      return x;
    }
    for (std::size_t i = 0; i < at0.machines.size(); ++i) {
      const auto& m = at0.machines[i];
      MachineState st;
      st.delta = m.delta0_deg * kPi / 180.0;
      st.omega = initial_omega(m, frame_f_);
      st.flux = m.initial_flux();
      st.avr_integ = st.flux;
      st.governor = m.mode == FrequencyMode::droop ? m.p_nominal : m.p_mech;
      st.store(std::span<double>(x).subspan(i * MachineState::kSize, MachineState::kSize));
    }
    return x;
  }

  void refresh_controls() {
    controls_.clear();
    for (const auto& m : current_.machines) controls_.push_back(m.control());
  }

  void apply(const Event& e, double t) {
    apply_event(current_, e);
    try {
      switch (e.action) {
        case EventAction::close_switch:
        case EventAction::open_switch:
          net_.apply_switch(e.target, e.action == EventAction::close_switch);
          break;
        case EventAction::set_mech_power:
          refresh_controls();
          break;
        case EventAction::set_iq:
        case EventAction::set_id:
          break;
      }
    } catch (const std::exception& ex) {
      throw SimulationError(ex.what(), t);
    }
  }

  /// Electrical frequency the damper windings pull towards.
  double system_omega_e(std::span<const MachineState> states) const {
    if (net_.grid_connected()) return 2.0 * kPi * current_.grid->params.f;
    for (std::size_t i = 0; i < current_.machines.size(); ++i)
      if (current_.machines[i].mode == FrequencyMode::speed_ref)
        return electrical_speed(states[i].omega, current_.machines[i].params.poles);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < current_.machines.size(); ++i) {
      const auto& p = current_.machines[i].params;
      const double w = p.h_inertia * p.s_rated;
      num += w * electrical_speed(states[i].omega, p.poles);
      den += w;
    }
    return den > 0.0 ? num / den : 2.0 * kPi * frame_f_;
  }

  const NetworkSolution& solve(double t, std::span<const double> x) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      states_[i] = MachineState::from(x.subspan(i * MachineState::kSize, MachineState::kSize));
      injections_[i] = machine_norton(states_[i], current_.machines[i].params).injection;
    }
    wind_ = current_.wind_currents(t);
    try {
      solution_ = net_.solve(injections_, wind_);
    } catch (const NetworkError& e) {
      throw SimulationError(e.what(), t);
    }
    return solution_;
  }

  void derivatives(double t, std::span<const double> x, std::span<double> dx) {
    const auto& sol = solve(t, x);
    const SystemFrame frame{2.0 * kPi * frame_f_, system_omega_e(states_)};
    const double v_mag = std::abs(sol.bus_voltages[0]);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      const auto& m = current_.machines[i];
      const auto& reading = sol.devices[*net_.find(m.id)];
      const auto swing = swing_derivatives(states_[i], reading.power.p_active, m.params, controls_[i].frequency,
                                           m.gains, frame);
      const auto exc = avr_derivatives(states_[i], v_mag, reading.power.q_reactive, m.params,
                                       controls_[i].voltage, m.gains);
      auto d = dx.subspan(i * MachineState::kSize, MachineState::kSize);
      d[0] = swing.d_delta;
      d[1] = swing.d_omega;
      d[2] = exc.d_flux;
      d[3] = swing.d_governor;
      d[4] = exc.d_avr_integ;
    }
  }

  std::vector<double> measure(double t, std::span<const double> x) {
    const auto& sol = solve(t, x);
    const double f = system_omega_e(states_) / (2.0 * kPi);
    return make_row(current_, net_, sol, states_, wind_, t, f);
  }

  const Scenario& base_;
  Scenario current_;
  NetworkModel net_;
  double frame_f_;
  std::vector<MachineMode> controls_;
  std::vector<MachineState> states_;
  std::vector<Phasor> injections_;
  std::vector<WindCurrent> wind_;
  NetworkSolution solution_;
};

}  // namespace

std::vector<std::string> measurement_columns(const Scenario& s) {
  std::vector<std::string> cols{"t", "f_hz", "v_bus_ll"};
  auto piq = [&](const std::string& prefix) {
    for (const char* k : {".P", ".Q", ".I"}) cols.push_back(prefix + k);
  };
  if (s.grid) piq("grid");
  for (const auto& m : s.machines) {
    const std::string p = "machine." + m.id;
    piq(p);
    for (const char* k : {".delta_deg", ".omega", ".flux", ".pm"}) cols.push_back(p + k);
  }
  for (const auto& l : s.loads) piq("load." + l.id);
  for (const auto& w : s.winds) {
    piq("wind." + w.id);
    cols.push_back("wind." + w.id + ".id");
  }
  return cols;
}

TimeSeries run(const Scenario& scenario) { return Simulator(scenario).run(); }

EquilibriumResult solve_steady_state(const Scenario& scenario, double t) {
  return steady_state_droop_solve(scenario.at_time(t).equilibrium_problem(t));
}

std::vector<double> equilibrium_row(const Scenario& scenario, const EquilibriumResult& result, double t) {
  const Scenario at = scenario.at_time(t);
  const NetworkModel net = at.build_network();
  const auto wind = at.wind_currents(t);
  return make_row(at, net, result.network, result.states, wind, t, result.frequency);
}

}  // namespace microgrid

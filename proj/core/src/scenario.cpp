#include "microgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace microgrid {

MachineMode MachineSpec::control() const {
  MachineMode mode{ConstantPower{p_mech}, FixedFlux{initial_flux()}};
  switch (this->mode) {
    case FrequencyMode::const_power: mode.frequency = ConstantPower{p_mech}; break;
    case FrequencyMode::speed_ref:
      mode.frequency = SpeedReference{sync_speed(reference_frequency(), params.poles).rad_per_s};
      break;
    case FrequencyMode::droop:
      mode.frequency = DroopGovernor{reference_frequency(), m_droop, p_nominal};
      break;
  }
  switch (avr) {
    case AvrMode::fixed: mode.voltage = FixedFlux{initial_flux()}; break;
    case AvrMode::pi: mode.voltage = VoltageRegulator{voltage_setpoint()}; break;
    case AvrMode::droop: mode.voltage = VoltageDroop{voltage_setpoint(), n_droop, q0}; break;
  }
  return mode;
}

WindCurrent WindSpec::current_at(double t) const {
  if (!connected) return {};
  const double id = series ? wind_current_at(*series, mapping, t) : id_rms;
  return {id, iq_rms};
}

std::string_view to_string(EventAction action) noexcept {
  switch (action) {
    case EventAction::close_switch: return "close_switch";
    case EventAction::open_switch: return "open_switch";
    case EventAction::set_mech_power: return "set_mech_power";
    case EventAction::set_iq: return "set_iq";
    case EventAction::set_id: return "set_id";
  }
  return "unknown";
}

double Scenario::frame_frequency() const {
  if (grid) return grid->params.f;
  for (const auto& m : machines)
    if (m.mode == FrequencyMode::speed_ref) return m.reference_frequency();
  if (!machines.empty()) return machines.front().params.f_rated;
  return 50.0;
}

const MachineSpec* Scenario::find_machine(std::string_view id) const {
  for (const auto& m : machines)
    if (m.id == id) return &m;
  return nullptr;
}

void apply_event(Scenario& s, const Event& e) {
  const bool closing = e.action == EventAction::close_switch;
  switch (e.action) {
    case EventAction::close_switch:
    case EventAction::open_switch:
      if (s.grid && e.target == "grid") {
        s.grid->params.connected = closing;
        return;
      }
      for (auto& l : s.loads)
        if (l.id == e.target) {
          l.params.connected = closing;
          return;
        }
      for (auto& w : s.winds)
        if (w.id == e.target) {
          w.connected = closing;
          return;
        }
      break;
    case EventAction::set_mech_power:
      for (auto& m : s.machines)
        if (m.id == e.target) {
          m.p_mech = e.value;
          return;
        }
      break;
    case EventAction::set_iq:
    case EventAction::set_id:
      for (auto& w : s.winds)
        if (w.id == e.target) {
          if (e.action == EventAction::set_iq) {
            w.iq_rms = e.value;
          } else {
            w.id_rms = e.value;
            w.series.reset();
          }
          return;
        }
      break;
  }
  throw std::invalid_argument("event '" + e.name + "' targets unknown or incompatible device '" + e.target + "'");
}

Scenario Scenario::at_time(double t) const {
  Scenario copy = *this;
  for (const auto& e : events)
    if (e.time <= t) apply_event(copy, e);
  return copy;
}

NetworkModel Scenario::build_network() const {
  NetworkModel net(frame_frequency());
  if (grid) net.add_grid("grid", grid->params);
  for (const auto& m : machines) net.add_machine(m.id, m.params.xs);
  for (const auto& l : loads) net.add_load(l.id, l.params);
  for (const auto& w : winds) {
    net.add_wind(w.id);
    if (!w.connected) net.apply_switch(w.id, false);
  }
  return net;
}

std::vector<WindCurrent> Scenario::wind_currents(double t) const {
  std::vector<WindCurrent> out;
  out.reserve(winds.size());
  for (const auto& w : winds) out.push_back(w.current_at(t));
  return out;
}

EquilibriumProblem Scenario::equilibrium_problem(double t) const {
  EquilibriumProblem problem{build_network(), {}, wind_currents(t)};
  for (const auto& m : machines) {
    EquilibriumMachine em;
    em.id = m.id;
    em.params = m.params;
    em.mode = m.control();
    em.delta0 = m.delta0_deg * kPi / 180.0;
    em.flux_guess = m.initial_flux();
    problem.machines.push_back(std::move(em));
  }
  return problem;
}

namespace {

template <typename F>
void check(std::vector<Issue>& issues, int line, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    issues.push_back({line, e.what()});
  }
}

}  // namespace

std::vector<Issue> validate(const Scenario& s) {
  std::vector<Issue> issues;
  auto add = [&](int line, std::string message) { issues.push_back({line, std::move(message)}); };

  if (!(s.sim.t_end > 0.0)) add(0, "sim t_end must be positive");
  if (!(s.sim.output_interval > 0.0)) add(0, "sim output_interval must be positive");
  check(issues, 0, [&] { s.sim.integrator.validate(); });

  std::set<std::string> ids;
  auto claim = [&](const std::string& id, int line) {
    if (!ids.insert(id).second) add(line, "duplicate device id '" + id + "'");
  };
  if (s.grid) {
    claim("grid", s.grid->line);
    check(issues, s.grid->line, [&] { s.grid->params.validate(); });
  }

  std::optional<double> master_f;
  for (const auto& m : s.machines) {
    claim(m.id, m.line);
    check(issues, m.line, [&] { m.params.validate(); });
    const std::string who = "machine '" + m.id + "': ";
    if (m.mode == FrequencyMode::droop && !(m.m_droop > 0.0)) add(m.line, who + "m_droop must be positive");
    if (m.avr == AvrMode::droop && !(m.n_droop > 0.0)) add(m.line, who + "n_droop must be positive");
    if (!(m.reference_frequency() > 0.0)) add(m.line, who + "f0 must be positive");
    if (m.voltage_setpoint() < 0.0) add(m.line, who + "v0 must be non-negative");
    if (m.initial_flux() < 0.0) add(m.line, who + "flux0 must be non-negative");
    const auto& g = m.gains;
    if (g.kp_avr < 0.0 || g.ki_avr < 0.0) add(m.line, who + "AVR gains must be non-negative");
    if (!(g.t_field > 0.0) || !(g.t_governor > 0.0) || !(g.tau_speed > 0.0))
      add(m.line, who + "controller time constants must be positive");
    if (m.mode == FrequencyMode::speed_ref) {
      const double f = m.reference_frequency();
      if (s.grid && std::abs(f - s.grid->params.f) > 1e-9)
        add(m.line, who + "speed reference frequency differs from the grid frequency");
      if (master_f && std::abs(f - *master_f) > 1e-9)
        add(m.line, who + "speed reference frequency differs from another speed-reference machine");
      master_f = f;
    }
  }

  for (const auto& l : s.loads) {
    claim(l.id, l.line);
    RLLoadParams p = l.params;
    p.connected = true;
    check(issues, l.line, [&] { p.validate(); });
  }
  for (const auto& w : s.winds) {
    claim(w.id, w.line);
    check(issues, w.line, [&] { w.mapping.validate(); });
    if (w.id_rms < 0.0) add(w.line, "wind '" + w.id + "': id_rms must be non-negative");
  }

  if (!s.grid && s.machines.empty()) add(0, "no voltage source: the scenario needs a grid or a machine");
  if (!s.grid && !s.machines.empty()) {
    const bool governed = std::any_of(s.machines.begin(), s.machines.end(), [](const MachineSpec& m) {
      return m.mode != FrequencyMode::const_power;
    });
    if (!governed)
      add(0, "no frequency reference: without a grid at least one machine needs mode=speed_ref or mode=droop");
  }

  for (const auto& e : s.events) {
    const std::string who = "event '" + e.name + "': ";
    if (e.time < 0.0 || e.time > s.sim.t_end) add(e.line, who + "time must lie within [0, t_end]");
    bool resolved = false;
    switch (e.action) {
      case EventAction::close_switch:
      case EventAction::open_switch:
        resolved = (s.grid && e.target == "grid") ||
                   std::any_of(s.loads.begin(), s.loads.end(), [&](const LoadSpec& l) { return l.id == e.target; }) ||
                   std::any_of(s.winds.begin(), s.winds.end(), [&](const WindSpec& w) { return w.id == e.target; });
        if (!resolved && s.find_machine(e.target)) {
          add(e.line, who + "machines cannot be switched");
          continue;
        }
        break;
      case EventAction::set_mech_power:
        if (const auto* m = s.find_machine(e.target)) {
          resolved = true;
          if (m->mode != FrequencyMode::const_power)
            add(e.line, who + "set_mech_power needs a machine with mode=const_power");
        }
        break;
      case EventAction::set_iq:
      case EventAction::set_id:
        resolved = std::any_of(s.winds.begin(), s.winds.end(), [&](const WindSpec& w) { return w.id == e.target; });
        if ((e.action == EventAction::set_id && e.value < 0.0)) add(e.line, who + "id must be non-negative");
        break;
    }
    if (!resolved) add(e.line, who + "target '" + e.target + "' does not resolve to a compatible device");
  }
  return issues;
}

}  // namespace microgrid

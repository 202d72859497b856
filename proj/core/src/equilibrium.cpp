#include "microgrid/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "microgrid/errors.hpp"

namespace microgrid {

namespace {

double speed_ref_frequency(const SpeedReference& s, const MachineParams& p) {
  return electrical_speed(s.omega_ref, p.poles) / (2.0 * kPi);
}

class Residuals {
 public:
  explicit Residuals(const EquilibriumProblem& problem) : problem_(problem), n_(problem.machines.size()) {
    if (n_ == 0) throw std::invalid_argument("equilibrium needs at least one machine");
    if (problem.network.machine_count() != n_)
      throw std::invalid_argument("network machine count does not match the problem");
    for (const auto& m : problem.machines) m.params.validate();

    for (const auto& d : problem.network.devices())
      if (d.kind == DeviceKind::grid && d.connected) fixed_f_ = d.grid.f;
    if (!fixed_f_) {
      for (const auto& m : problem.machines) {
        if (const auto* s = std::get_if<SpeedReference>(&m.mode.frequency)) {
          fixed_f_ = speed_ref_frequency(*s, m.params);
          break;
        }
      }
    }
    bool governs = fixed_f_.has_value();
    for (const auto& m : problem.machines) {
      if (const auto* s = std::get_if<SpeedReference>(&m.mode.frequency)) {
        if (std::abs(speed_ref_frequency(*s, m.params) - *fixed_f_) > 1e-9)
          throw std::invalid_argument("speed-reference machine '" + m.id +
                                      "' conflicts with the system frequency");
      }
      if (std::holds_alternative<DroopGovernor>(m.mode.frequency)) governs = true;
    }
    if (!governs)
      throw std::invalid_argument("no grid, speed-reference or droop machine sets the frequency");
    f_scale_ = problem.network.frequency();
  }

  std::size_t size() const { return 2 * n_ + 1; }

  Eigen::VectorXd initial_guess() const {
    Eigen::VectorXd x(size());
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& m = problem_.machines[i];
      x(i) = m.delta0;
      double flux = m.flux_guess > 0.0 ? m.flux_guess : m.params.nominal_flux();
      if (const auto* fixed = std::get_if<FixedFlux>(&m.mode.voltage)) flux = fixed->flux;
      x(n_ + i) = flux / m.params.nominal_flux();
    }
    x(2 * n_) = fixed_f_.value_or(f_scale_) / f_scale_;
    return x;
  }

  std::vector<MachineState> states(const Eigen::VectorXd& x) const {
    std::vector<MachineState> out(n_);
    const double f = x(2 * n_) * f_scale_;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& p = problem_.machines[i].params;
      out[i].delta = x(i);
      out[i].omega = 2.0 * kPi * f * 2.0 / static_cast<double>(p.poles);
      out[i].flux = x(n_ + i) * p.nominal_flux();
      out[i].avr_integ = out[i].flux;
    }
    return out;
  }

  NetworkSolution network(const std::vector<MachineState>& states) const {
    std::vector<Phasor> injections(n_);
    for (std::size_t i = 0; i < n_; ++i)
      injections[i] = machine_norton(states[i], problem_.machines[i].params).injection;
    return problem_.network.solve(injections, problem_.wind);
  }

  const DeviceReading& machine_reading(const NetworkSolution& sol, std::size_t i) const {
    return sol.devices[machine_device_index(i)];
  }

  std::size_t machine_device_index(std::size_t i) const {
    const auto devices = problem_.network.devices();
    for (std::size_t k = 0; k < devices.size(); ++k)
      if (devices[k].kind == DeviceKind::machine && devices[k].slot == i) return k;
    throw std::logic_error("machine slot missing from network");
  }

  Phasor machine_bus_voltage(const NetworkSolution& sol, std::size_t i) const {
    return sol.bus_voltages[problem_.network.devices()[machine_device_index(i)].bus];
  }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const {
    const auto st = states(x);
    const auto sol = network(st);
    const double f = x(2 * n_) * f_scale_;
    Eigen::VectorXd r(size());

    for (std::size_t i = 0; i < n_; ++i) {
      const auto& m = problem_.machines[i];
      const auto& reading = machine_reading(sol, i).power;
      const double s = m.params.s_rated;
      std::visit(
          [&](const auto& ctrl) {
            using T = std::decay_t<decltype(ctrl)>;
            if constexpr (std::is_same_v<T, SpeedReference>) {
              r(i) = x(i) - m.delta0;
            } else if constexpr (std::is_same_v<T, ConstantPower>) {
              r(i) = (reading.p_active - ctrl.p_mech) / s;
            } else {
              r(i) = (reading.p_active - governor_power_target(ctrl, f, m.params)) / s;
            }
          },
          m.mode.frequency);

      const double vb = m.params.v_base();
      const double v = std::abs(machine_bus_voltage(sol, i));
      std::visit(
          [&](const auto& ctrl) {
            using T = std::decay_t<decltype(ctrl)>;
            if constexpr (std::is_same_v<T, FixedFlux>) {
              r(n_ + i) = x(n_ + i) - ctrl.flux / m.params.nominal_flux();
            } else if constexpr (std::is_same_v<T, VoltageRegulator>) {
              r(n_ + i) = (v - ctrl.v_ref) / vb;
            } else {
              r(n_ + i) = (v - voltage_droop_reference(ctrl, reading.q_reactive)) / vb;
            }
          },
          m.mode.voltage);
    }

    if (fixed_f_) {
      r(2 * n_) = (f - *fixed_f_) / f_scale_;
    } else {
      r(2 * n_) = x(0) - problem_.machines[0].delta0;
    }
    return r;
  }

 private:
  const EquilibriumProblem& problem_;
  std::size_t n_;
  std::optional<double> fixed_f_;
  double f_scale_ = 50.0;
};

Eigen::MatrixXd jacobian(const Residuals& res, const Eigen::VectorXd& x, const Eigen::VectorXd& r0) {
  const auto n = x.size();
  Eigen::MatrixXd jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd xp = x;
    const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
    xp(j) += h;
    jac.col(j) = (res.evaluate(xp) - r0) / h;
  }
  return jac;
}

}  // namespace

EquilibriumResult steady_state_droop_solve(const EquilibriumProblem& problem, const EquilibriumOptions& options) {
  const Residuals res(problem);
  Eigen::VectorXd x = res.initial_guess();
  Eigen::VectorXd r = res.evaluate(x);
  double norm = r.lpNorm<Eigen::Infinity>();

  int it = 0;
  while (norm >= options.tolerance) {
    if (it == options.max_iterations) {
      throw ConvergenceError("steady-state solve did not converge after " + std::to_string(it) +
                                 " iterations (max residual " + std::to_string(norm) + ")",
                             it, std::vector<double>(r.data(), r.data() + r.size()));
    }
    ++it;
    const Eigen::MatrixXd jac = jacobian(res, x, r);
    const Eigen::VectorXd step = jac.fullPivLu().solve(-r);

    double lambda = 1.0;
    Eigen::VectorXd trial = x + step;
    Eigen::VectorXd r_trial = res.evaluate(trial);
    while (!(r_trial.lpNorm<Eigen::Infinity>() < (1.0 - 1e-4 * lambda) * norm) && lambda > 1e-6) {
      lambda *= options.backtrack;
      trial = x + lambda * step;
      r_trial = res.evaluate(trial);
    }
    x = std::move(trial);
    r = std::move(r_trial);
    norm = r.lpNorm<Eigen::Infinity>();
  }

  EquilibriumResult out;
  out.iterations = it;
  out.max_residual = norm;
  out.frequency = x(static_cast<Eigen::Index>(2 * problem.machines.size())) * problem.network.frequency();
  out.states = res.states(x);
  out.network = res.network(out.states);
  for (std::size_t i = 0; i < problem.machines.size(); ++i) {
    const auto& reading = res.machine_reading(out.network, i);
    const Phasor vb = res.machine_bus_voltage(out.network, i);
    auto& st = out.states[i];
    st.governor = reading.power.p_active;
    MachineOperatingPoint op;
    op.p = reading.power.p_active;
    op.q = reading.power.q_reactive;
    op.emf = emf_magnitude(electrical_speed(st.omega, problem.machines[i].params.poles), st.flux);
    op.v_terminal = std::abs(vb);
    op.load_angle = std::remainder(st.delta - std::arg(vb), 2.0 * kPi);
    out.machines.push_back(op);
  }
  return out;
}

}  // namespace microgrid

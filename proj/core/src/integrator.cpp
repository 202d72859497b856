#include "microgrid/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "microgrid/errors.hpp"

namespace microgrid {

std::string_view to_string(IntegrationMethod method) noexcept {
  return method == IntegrationMethod::rk4 ? "rk4" : "rk23";
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("integrator dt must be positive");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("integrator tolerances must be positive");
  if (max_step < 0.0) throw std::invalid_argument("integrator max_step must be non-negative");
}

namespace {

void axpy(std::span<const double> x, double a, std::span<const double> k, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * k[i];
}

class Stepper {
 public:
  Stepper(const DerivativeFn& deriv, const IntegratorConfig& cfg, std::size_t n)
      : deriv_(deriv), cfg_(cfg), k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n), next_(n), h_(cfg.dt) {}

  // Advances x from t to exactly t_end.
  void advance(StateVector& x, double t, double t_end) {
    if (cfg_.method == IntegrationMethod::rk4) {
      advance_fixed(x, t, t_end);
    } else {
      advance_adaptive(x, t, t_end);
    }
  }

 private:
  void advance_fixed(StateVector& x, double t, double t_end) {
    const double span = t_end - t;
    const auto steps = std::max<long long>(1, static_cast<long long>(std::ceil(span / cfg_.dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long long i = 0; i < steps; ++i) {
      const double ti = (i + 1 == steps) ? t_end - h : t + static_cast<double>(i) * h;
      rk4(x, ti, h);
    }
  }

  void rk4(StateVector& x, double t, double h) {
    deriv_(t, x, k1_);
    axpy(x, 0.5 * h, k1_, tmp_);
    deriv_(t + 0.5 * h, tmp_, k2_);
    axpy(x, 0.5 * h, k2_, tmp_);
    deriv_(t + 0.5 * h, tmp_, k3_);
    axpy(x, h, k3_, tmp_);
    deriv_(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  // Bogacki-Shampine 3(2) pair with the usual elementary controller.
  void advance_adaptive(StateVector& x, double t, double t_end) {
    while (t < t_end) {
      double h = h_;
      if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
      bool last = false;
      if (t + h >= t_end || t_end - (t + h) < kMinStep) {
        h = t_end - t;
        last = true;
      }

      deriv_(t, x, k1_);
      axpy(x, 0.5 * h, k1_, tmp_);
      deriv_(t + 0.5 * h, tmp_, k2_);
      axpy(x, 0.75 * h, k2_, tmp_);
      deriv_(t + 0.75 * h, tmp_, k3_);
      for (std::size_t i = 0; i < x.size(); ++i)
        next_[i] = x[i] + h * (2.0 / 9.0 * k1_[i] + 1.0 / 3.0 * k2_[i] + 4.0 / 9.0 * k3_[i]);
      deriv_(t + h, next_, k4_);

      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double lower = x[i] + h * (7.0 / 24.0 * k1_[i] + 0.25 * k2_[i] + 1.0 / 3.0 * k3_[i] +
                                         0.125 * k4_[i]);
        const double scale =
            cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(x[i]), std::abs(next_[i]));
        double ratio = std::abs(next_[i] - lower) / scale;
        // std::max would silently drop a NaN, so reject non-finite trials here
        if (!std::isfinite(next_[i]) || std::isnan(ratio)) ratio = 1e6;
        err = std::max(err, ratio);
      }

      if (err <= 1.0) {
        x.swap(next_);
        t = last ? t_end : t + h;
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
        // A step clipped to land on a breakpoint says nothing about the
        // natural step size, so only grow from full steps.
        if (!last || h >= h_) h_ = h * std::clamp(grow, 0.2, 5.0);
      } else {
        h_ = h * std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 0.5);
        if (h_ < kMinStep) throw IntegrationError("adaptive step underflow", t);
      }
    }
  }

  const DerivativeFn& deriv_;
  const IntegratorConfig& cfg_;
  StateVector k1_, k2_, k3_, k4_, tmp_, next_;
  double h_;
};

}  // namespace

StateVector rk4_step(const DerivativeFn& deriv, std::span<const double> x, double t, double dt) {
  const std::size_t n = x.size();
  StateVector k1(n), k2(n), k3(n), k4(n), tmp(n);
  deriv(t, x, k1);
  axpy(x, 0.5 * dt, k1, tmp);
  deriv(t + 0.5 * dt, tmp, k2);
  axpy(x, 0.5 * dt, k2, tmp);
  deriv(t + 0.5 * dt, tmp, k3);
  axpy(x, dt, k3, tmp);
  deriv(t + dt, tmp, k4);
  StateVector out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

Trajectory integrate(const DerivativeFn& deriv, StateVector x, double t0, double t1,
                     const IntegratorConfig& cfg, const IntegrationOptions& options) {
  cfg.validate();
  if (!(t1 > t0)) throw std::invalid_argument("integration interval must satisfy t1 > t0");
  if (options.output_interval < 0.0) throw std::invalid_argument("output interval must be non-negative");
  const auto& events = options.event_times;
  if (!std::is_sorted(events.begin(), events.end()))
    throw std::invalid_argument("event times must be sorted");
  if (!events.empty() && (events.front() < t0 || events.back() > t1))
    throw std::invalid_argument("event times must lie within [t0, t1]");

  // Breakpoints: output grid, events and the end point. Times closer than a
  // relative 1e-12 collapse onto the exact event (or end) value.
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  std::vector<double> grid;
  if (options.output_interval > 0.0) {
    for (long long k = 1;; ++k) {
      const double t = t0 + static_cast<double>(k) * options.output_interval;
      if (t >= t1 || close(t, t1)) break;
      grid.push_back(t);
    }
  }
  std::vector<double> exact(events.begin(), events.end());
  exact.push_back(t1);
  std::vector<double> breakpoints;
  for (double t : grid) {
    const bool shadowed = std::any_of(exact.begin(), exact.end(), [&](double e) { return close(t, e); });
    if (!shadowed) breakpoints.push_back(t);
  }
  for (double e : exact)
    if (e > t0) breakpoints.push_back(e);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

  Trajectory traj;
  std::size_t next_event = 0;
  auto apply_events = [&](double t) {
    while (next_event < events.size() && events[next_event] <= t) {
      if (options.on_event) options.on_event(next_event, t, x);
      ++next_event;
    }
  };
  auto record = [&](double t) {
    if (options.observer) options.observer(t, x);
    if (options.store_states) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  };

  apply_events(t0);
  record(t0);

  Stepper stepper(deriv, cfg, x.size());
  double t = t0;
  for (double bp : breakpoints) {
    stepper.advance(x, t, bp);
    t = bp;
    apply_events(t);
    record(t);
  }
  return traj;
}

}  // namespace microgrid

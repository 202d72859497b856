#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace microgrid {

using StateVector = std::vector<double>;

enum class IntegrationMethod { rk4, rk23 };

std::string_view to_string(IntegrationMethod method) noexcept;

struct IntegratorConfig {
  /// Fixed step for rk4; initial step for rk23.
  double dt = 1e-3;
  IntegrationMethod method = IntegrationMethod::rk4;
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  /// Upper bound on the rk23 step; 0 leaves it unbounded.
  double max_step = 0.0;

  /// Throws std::invalid_argument on non-positive step or tolerances.
  void validate() const;
};

/// Adaptive steps smaller than this raise IntegrationError.
inline constexpr double kMinStep = 1e-12;

using DerivativeFn = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

/// Called once per event, in index order, when integration reaches the
/// event's time. May modify the state and any parameters the derivative
/// function reads.
using EventFn = std::function<void(std::size_t event_index, double t, StateVector& x)>;

/// Called for every recorded sample, after events at that time have applied.
using ObserverFn = std::function<void(double t, std::span<const double> x)>;

struct IntegrationOptions {
  /// Spacing of the output grid t0 + k*interval; 0 records only t0, t1 and events.
  double output_interval = 0.0;
  /// Sorted, within [t0, t1]. Repeated times are allowed.
  std::span<const double> event_times;
  EventFn on_event;
  ObserverFn observer;
  /// Keep every recorded state in the returned trajectory.
  bool store_states = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

/// One classical fourth-order Runge-Kutta step.
StateVector rk4_step(const DerivativeFn& deriv, std::span<const double> x, double t, double dt);

/// Integrates from t0 to t1. Steps never straddle an event or output time:
/// the step is shortened to land on each, so every event time is a sample
/// of the returned trajectory.
Trajectory integrate(const DerivativeFn& deriv, StateVector x0, double t0, double t1,
                     const IntegratorConfig& cfg, const IntegrationOptions& options = {});

}  // namespace microgrid

#include "microgrid/phasor.hpp"

#include <cmath>

namespace microgrid {

AlphaBeta clarke(const ThreePhaseSample& abc) noexcept {
  return {(2.0 * abc.a - abc.b - abc.c) / 3.0, (abc.b - abc.c) / kSqrt3};
}

ThreePhaseSample inverse_clarke(const AlphaBeta& ab) noexcept {
  const double half_beta = 0.5 * kSqrt3 * ab.beta;
  return {ab.alpha, -0.5 * ab.alpha + half_beta, -0.5 * ab.alpha - half_beta};
}

DirectQuadrature park(const AlphaBeta& ab, double theta) noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {ab.alpha * c + ab.beta * s, -ab.alpha * s + ab.beta * c};
}

AlphaBeta inverse_park(const DirectQuadrature& dq, double theta) noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {dq.d * c - dq.q * s, dq.d * s + dq.q * c};
}

PowerReading complex_power(Phasor v, Phasor i) noexcept {
  PowerReading r;
  r.p_active = 3.0 * (v.real() * i.real() + v.imag() * i.imag());
  r.q_reactive = 3.0 * (v.imag() * i.real() - v.real() * i.imag());
  r.v_rms_phase = std::abs(v);
  r.i_rms_phase = std::abs(i);
  const double apparent = 3.0 * r.v_rms_phase * r.i_rms_phase;
  r.power_factor = apparent > 0.0 ? std::abs(r.p_active) / apparent : 0.0;
  return r;
}

ThreePhaseSample balanced_sample(Phasor rms, double omega, double t) noexcept {
  const double peak = rms_to_peak(std::abs(rms));
  const double angle = omega * t + std::arg(rms);
  constexpr double shift = 2.0 * kPi / 3.0;
  return {peak * std::cos(angle), peak * std::cos(angle - shift), peak * std::cos(angle + shift)};
}

}  // namespace microgrid

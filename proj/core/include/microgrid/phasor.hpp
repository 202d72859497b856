#pragma once

#include <complex>
#include <numbers>

namespace microgrid {

using Complex = std::complex<double>;

/// Per-phase RMS phasor at the network frame frequency. Every stored voltage
/// and current uses the RMS convention; peak values appear only through
/// rms_to_peak / peak_to_rms.
using Phasor = std::complex<double>;

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kSqrt3 = std::numbers::sqrt3;
inline constexpr double kPi = std::numbers::pi;

struct ThreePhaseSample {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
};

struct DirectQuadrature {
  double d = 0.0;
  double q = 0.0;
};

/// Three-phase power measured at one point. P and Q are totals over all
/// three phases; voltage and current are per-phase RMS magnitudes.
struct PowerReading {
  double p_active = 0.0;
  double q_reactive = 0.0;
  double v_rms_phase = 0.0;
  double i_rms_phase = 0.0;
  double power_factor = 0.0;
};

/// Current source in parallel with an admittance.
struct NortonEquivalent {
  Phasor injection;
  Complex admittance;
};

/// Amplitude-invariant Clarke transform: a balanced set of peak A maps to an
/// (alpha, beta) vector of length A.
AlphaBeta clarke(const ThreePhaseSample& abc) noexcept;
ThreePhaseSample inverse_clarke(const AlphaBeta& ab) noexcept;

DirectQuadrature park(const AlphaBeta& ab, double theta) noexcept;
AlphaBeta inverse_park(const DirectQuadrature& dq, double theta) noexcept;

/// S = 3 V conj(I). Positive P and Q flow in the direction of the measured
/// current.
PowerReading complex_power(Phasor v, Phasor i) noexcept;

/// Instantaneous phase values of a balanced set whose phase-a RMS phasor is
/// `rms`, observed at time t in a frame rotating at omega.
ThreePhaseSample balanced_sample(Phasor rms, double omega, double t) noexcept;

constexpr double line_to_phase(double v_ll_rms) noexcept { return v_ll_rms / kSqrt3; }
constexpr double phase_to_line(double v_phase_rms) noexcept { return v_phase_rms * kSqrt3; }
constexpr double rms_to_peak(double rms) noexcept { return rms * kSqrt2; }
constexpr double peak_to_rms(double peak) noexcept { return peak / kSqrt2; }

}  // namespace microgrid

#pragma once

#include <string>
#include <vector>

#include "microgrid/machine.hpp"
#include "microgrid/network.hpp"

namespace microgrid {

struct EquilibriumMachine {
  std::string id;
  MachineParams params;
  MachineMode mode;
  /// Rotor angle held by a speed-reference machine, and the angle of the
  /// reference machine when the system frequency is free (rad).
  double delta0 = 0.0;
  /// Starting point for the flux unknown (Wb); 0 uses the nominal flux.
  double flux_guess = 0.0;
};

struct EquilibriumProblem {
  /// Machines appear here in the same order they were added to the network.
  NetworkModel network;
  std::vector<EquilibriumMachine> machines;
  std::vector<WindCurrent> wind;
};

struct MachineOperatingPoint {
  double p = 0.0;           // W
  double q = 0.0;           // var
  double load_angle = 0.0;  // rad, internal EMF relative to the bus voltage
  double emf = 0.0;         // V, phase RMS
  double v_terminal = 0.0;  // V, phase RMS
};

struct EquilibriumResult {
  double frequency = 0.0;  // Hz
  std::vector<MachineOperatingPoint> machines;
  /// Consistent dynamic states, usable as initial conditions.
  std::vector<MachineState> states;
  NetworkSolution network;
  int iterations = 0;
  double max_residual = 0.0;  // per unit
};

struct EquilibriumOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // per unit, on every residual
  double backtrack = 0.5;   // step reduction factor of the line search
};

/// Solves the algebraic steady state of machines, loads and converter
/// injections: every machine's frequency-side law (fixed power, droop or
/// speed reference) and voltage-side law (fixed flux, regulated voltage or
/// droop) together with the network equations, by damped Newton iteration on
/// per-unit residuals. System frequency is pinned by a connected grid or a
/// speed-reference machine and otherwise solved for. Throws ConvergenceError
/// with the final residuals when the iteration stalls.
EquilibriumResult steady_state_droop_solve(const EquilibriumProblem& problem,
                                           const EquilibriumOptions& options = {});

}  // namespace microgrid

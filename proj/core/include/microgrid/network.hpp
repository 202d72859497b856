#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "microgrid/phasor.hpp"

namespace microgrid {

/// Stiff three-phase source behind an R-L impedance.
struct GridSourceParams {
  double v_ll = 11e3;  // V, line-to-line RMS
  double f = 50.0;     // Hz
  double r = 1e-5;     // ohm
  double l = 0.04;     // H
  bool connected = true;

  void validate() const;
};

/// Constant-impedance series R-L load, per phase.
struct RLLoadParams {
  double r = 0.0;  // ohm
  double l = 0.0;  // H
  bool connected = true;

  void validate() const;
};

/// Converter current referred to the bus voltage: id in phase with it, iq
/// lagging it by 90 degrees. Both per-phase RMS.
struct WindCurrent {
  double id_rms = 0.0;
  double iq_rms = 0.0;
};

/// Y = 1 / (r + j 2 pi f l); zero when disconnected. Throws
/// std::invalid_argument for a connected load with r = l = 0.
Complex load_admittance(const RLLoadParams& load, double f);

/// Norton form of the grid source with its EMF at angle zero; zero when
/// disconnected.
NortonEquivalent grid_norton(const GridSourceParams& grid);

/// Current a grid-feeding converter injects into the bus: (id + j iq) in the
/// frame of the bus voltage, so the bus receives P = 3|V| id and gives up
/// Q = 3|V| iq. Zero on a de-energized bus.
Phasor wind_injection(double id_rms, double iq_rms, Phasor v_bus) noexcept;

enum class DeviceKind { grid, machine, load, wind };

std::string_view to_string(DeviceKind kind) noexcept;

struct Device {
  std::string id;
  DeviceKind kind;
  std::size_t bus = 0;
  bool connected = true;
  /// Index among devices of the same kind, in insertion order.
  std::size_t slot = 0;
  GridSourceParams grid{};
  RLLoadParams load{};
  double xs = 0.0;
};

/// Power flowing out of a source into its bus, or out of the bus into a load.
struct DeviceReading {
  Phasor current;
  PowerReading power;
};

struct NetworkSolution {
  std::vector<Phasor> bus_voltages;
  /// Indexed like the model's devices.
  std::vector<DeviceReading> devices;
  /// ||Y V - I|| / ||I||.
  double residual = 0.0;
};

/// Quasi-static phasor network at a single frame frequency. Devices are
/// shunt elements on buses; optional branches tie buses together. The
/// admittance matrix is refactored whenever the topology or a switch changes.
class NetworkModel {
 public:
  explicit NetworkModel(double frequency = 50.0, std::size_t bus_count = 1);

  std::size_t add_grid(std::string id, const GridSourceParams& params, std::size_t bus = 0);
  std::size_t add_machine(std::string id, double xs, std::size_t bus = 0);
  std::size_t add_load(std::string id, const RLLoadParams& params, std::size_t bus = 0);
  std::size_t add_wind(std::string id, std::size_t bus = 0);
  void add_branch(std::size_t from, std::size_t to, Complex impedance);

  /// Opens or closes a grid, load or wind device. Idempotent. Throws
  /// std::invalid_argument for unknown ids and for machines.
  void apply_switch(std::string_view id, bool closed);

  double frequency() const noexcept { return frequency_; }
  std::size_t bus_count() const noexcept { return bus_count_; }
  std::span<const Device> devices() const noexcept { return devices_; }
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t machine_count() const noexcept { return machine_count_; }
  std::size_t wind_count() const noexcept { return wind_count_; }
  bool grid_connected() const noexcept;

  Eigen::MatrixXcd admittance_matrix() const;

  /// Solves Y V = I for the bus voltages. machine_injections holds the
  /// Norton current of each machine (insertion order), wind the converter
  /// currents of each wind device. Throws NetworkError when the matrix is
  /// singular or a bus has no connected grid or machine.
  NetworkSolution solve(std::span<const Phasor> machine_injections,
                        std::span<const WindCurrent> wind = {}) const;

 private:
  struct Branch {
    std::size_t from;
    std::size_t to;
    Complex admittance;
  };

  std::size_t add_device(Device device);
  void refactor();
  Complex device_admittance(const Device& device) const;

  double frequency_;
  std::size_t bus_count_;
  std::vector<Device> devices_;
  std::vector<Branch> branches_;
  std::size_t machine_count_ = 0;
  std::size_t wind_count_ = 0;

  Eigen::MatrixXcd y_;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu_;
  std::optional<std::string> fault_;
};

}  // namespace microgrid

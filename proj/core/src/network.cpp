#include "microgrid/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "microgrid/errors.hpp"

namespace microgrid {

void GridSourceParams::validate() const {
  if (v_ll < 0.0 || r < 0.0 || l < 0.0) throw std::invalid_argument("grid parameters must be non-negative");
  if (!(f > 0.0)) throw std::invalid_argument("grid frequency must be positive");
  if (connected && r == 0.0 && l == 0.0)
    throw std::invalid_argument("grid internal impedance must be non-zero");
}

void RLLoadParams::validate() const {
  if (r < 0.0 || l < 0.0) throw std::invalid_argument("load r and l must be non-negative");
  if (connected && r == 0.0 && l == 0.0) throw std::invalid_argument("load r and l cannot both be zero");
}

Complex load_admittance(const RLLoadParams& load, double f) {
  if (!load.connected) return {0.0, 0.0};
  load.validate();
  if (!(f > 0.0)) throw std::invalid_argument("frequency must be positive");
  return 1.0 / Complex(load.r, 2.0 * kPi * f * load.l);
}

NortonEquivalent grid_norton(const GridSourceParams& grid) {
  if (!grid.connected) return {{0.0, 0.0}, {0.0, 0.0}};
  grid.validate();
  const Complex z(grid.r, 2.0 * kPi * grid.f * grid.l);
  const Phasor emf(line_to_phase(grid.v_ll), 0.0);
  return {emf / z, 1.0 / z};
}

Phasor wind_injection(double id_rms, double iq_rms, Phasor v_bus) noexcept {
  const double magnitude = std::abs(v_bus);
  if (magnitude == 0.0) return {0.0, 0.0};
  return Complex(id_rms, iq_rms) * (v_bus / magnitude);
}

std::string_view to_string(DeviceKind kind) noexcept {
  switch (kind) {
    case DeviceKind::grid: return "grid";
    case DeviceKind::machine: return "machine";
    case DeviceKind::load: return "load";
    case DeviceKind::wind: return "wind";
  }
  return "unknown";
}

NetworkModel::NetworkModel(double frequency, std::size_t bus_count)
    : frequency_(frequency), bus_count_(bus_count) {
  if (!(frequency > 0.0)) throw std::invalid_argument("network frequency must be positive");
  if (bus_count == 0) throw std::invalid_argument("network needs at least one bus");
  refactor();
}

std::size_t NetworkModel::add_device(Device device) {
  if (device.bus >= bus_count_) throw std::invalid_argument("bus index out of range");
  if (find(device.id)) throw std::invalid_argument("duplicate device id '" + device.id + "'");
  devices_.push_back(std::move(device));
  refactor();
  return devices_.size() - 1;
}

std::size_t NetworkModel::add_grid(std::string id, const GridSourceParams& params, std::size_t bus) {
  params.validate();
  Device d{std::move(id), DeviceKind::grid, bus, params.connected};
  d.grid = params;
  return add_device(std::move(d));
}

std::size_t NetworkModel::add_machine(std::string id, double xs, std::size_t bus) {
  if (!(xs > 0.0)) throw std::invalid_argument("machine reactance must be positive");
  Device d{std::move(id), DeviceKind::machine, bus, true};
  d.xs = xs;
  d.slot = machine_count_;
  const std::size_t index = add_device(std::move(d));
  ++machine_count_;
  return index;
}

std::size_t NetworkModel::add_load(std::string id, const RLLoadParams& params, std::size_t bus) {
  RLLoadParams checked = params;
  checked.connected = true;
  checked.validate();
  Device d{std::move(id), DeviceKind::load, bus, params.connected};
  d.load = params;
  return add_device(std::move(d));
}

std::size_t NetworkModel::add_wind(std::string id, std::size_t bus) {
  Device d{std::move(id), DeviceKind::wind, bus, true};
  d.slot = wind_count_;
  const std::size_t index = add_device(std::move(d));
  ++wind_count_;
  return index;
}

void NetworkModel::add_branch(std::size_t from, std::size_t to, Complex impedance) {
  if (from >= bus_count_ || to >= bus_count_ || from == to)
    throw std::invalid_argument("branch must join two distinct existing buses");
  if (impedance == Complex(0.0, 0.0)) throw std::invalid_argument("branch impedance must be non-zero");
  branches_.push_back({from, to, 1.0 / impedance});
  refactor();
}

std::optional<std::size_t> NetworkModel::find(std::string_view id) const {
  for (std::size_t i = 0; i < devices_.size(); ++i)
    if (devices_[i].id == id) return i;
  return std::nullopt;
}

bool NetworkModel::grid_connected() const noexcept {
  return std::any_of(devices_.begin(), devices_.end(),
                     [](const Device& d) { return d.kind == DeviceKind::grid && d.connected; });
}

void NetworkModel::apply_switch(std::string_view id, bool closed) {
  const auto index = find(id);
  if (!index) throw std::invalid_argument("unknown device '" + std::string(id) + "'");
  Device& d = devices_[*index];
  if (d.kind == DeviceKind::machine)
    throw std::invalid_argument("machine '" + d.id + "' cannot be switched");
  if (d.connected == closed) return;
  d.connected = closed;
  d.grid.connected = closed;
  d.load.connected = closed;
  refactor();
}

Complex NetworkModel::device_admittance(const Device& d) const {
  if (!d.connected) return {0.0, 0.0};
  switch (d.kind) {
    case DeviceKind::grid: return grid_norton(d.grid).admittance;
    case DeviceKind::machine: return 1.0 / Complex(0.0, d.xs);
    case DeviceKind::load: return load_admittance(d.load, frequency_);
    case DeviceKind::wind: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

Eigen::MatrixXcd NetworkModel::admittance_matrix() const { return y_; }

void NetworkModel::refactor() {
  const auto n = static_cast<Eigen::Index>(bus_count_);
  y_ = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& d : devices_) {
    const auto b = static_cast<Eigen::Index>(d.bus);
    y_(b, b) += device_admittance(d);
  }
  for (const auto& br : branches_) {
    const auto i = static_cast<Eigen::Index>(br.from);
    const auto j = static_cast<Eigen::Index>(br.to);
    y_(i, i) += br.admittance;
    y_(j, j) += br.admittance;
    y_(i, j) -= br.admittance;
    y_(j, i) -= br.admittance;
  }

  // Every island of buses needs a connected grid or machine to hold voltage.
  std::vector<std::size_t> parent(bus_count_);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t b) {
    while (parent[b] != b) b = parent[b] = parent[parent[b]];
    return b;
  };
  for (const auto& br : branches_) parent[root(br.from)] = root(br.to);
  std::vector<bool> energized(bus_count_, false);
  for (const auto& d : devices_)
    if (d.connected && (d.kind == DeviceKind::grid || d.kind == DeviceKind::machine))
      energized[root(d.bus)] = true;

  fault_.reset();
  for (std::size_t b = 0; b < bus_count_; ++b) {
    if (!energized[root(b)]) {
      fault_ = "bus " + std::to_string(b) + " is de-energized: no connected grid or machine";
      return;
    }
  }
  lu_.compute(y_);
  if (!lu_.isInvertible()) fault_ = "admittance matrix is singular";
}

NetworkSolution NetworkModel::solve(std::span<const Phasor> machine_injections,
                                    std::span<const WindCurrent> wind) const {
  if (machine_injections.size() != machine_count_)
    throw std::invalid_argument("one Norton injection is required per machine");
  if (!wind.empty() && wind.size() != wind_count_)
    throw std::invalid_argument("one converter current is required per wind device");
  if (fault_) throw NetworkError(*fault_);

  const auto n = static_cast<Eigen::Index>(bus_count_);
  Eigen::VectorXcd sources = Eigen::VectorXcd::Zero(n);
  for (const auto& d : devices_) {
    const auto b = static_cast<Eigen::Index>(d.bus);
    if (d.kind == DeviceKind::grid) sources(b) += grid_norton(d.grid).injection;
    if (d.kind == DeviceKind::machine) sources(b) += machine_injections[d.slot];
  }

  auto wind_currents = [&](const Eigen::VectorXcd& v) {
    Eigen::VectorXcd inj = Eigen::VectorXcd::Zero(n);
    for (const auto& d : devices_) {
      if (d.kind != DeviceKind::wind || !d.connected || wind.empty()) continue;
      const auto b = static_cast<Eigen::Index>(d.bus);
      inj(b) += wind_injection(wind[d.slot].id_rms, wind[d.slot].iq_rms, v(b));
    }
    return inj;
  };

  Eigen::VectorXcd v = lu_.solve(sources);
  Eigen::VectorXcd injected = sources;
  const bool has_wind = !wind.empty() && std::any_of(devices_.begin(), devices_.end(), [](const Device& d) {
    return d.kind == DeviceKind::wind && d.connected;
  });
  if (has_wind) {
    // Converter currents follow the bus voltage angle; a fixed point on V
    // contracts quickly because the currents are small against Y V.
    constexpr int kMaxIterations = 200;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
      injected = sources + wind_currents(v);
      Eigen::VectorXcd next = lu_.solve(injected);
      const double change = (next - v).norm();
      v = std::move(next);
      if (change <= 1e-14 * std::max(v.norm(), 1.0)) break;
    }
    if (it == kMaxIterations) throw NetworkError("converter current iteration did not converge");
    injected = sources + wind_currents(v);
  }

  NetworkSolution sol;
  sol.bus_voltages.assign(v.data(), v.data() + n);
  const double scale = injected.norm();
  sol.residual = scale > 0.0 ? (y_ * v - injected).norm() / scale : (y_ * v).norm();

  sol.devices.reserve(devices_.size());
  for (const auto& d : devices_) {
    const Phasor vb = sol.bus_voltages[d.bus];
    Phasor current{0.0, 0.0};
    if (d.connected) {
      switch (d.kind) {
        case DeviceKind::grid: {
          const auto norton = grid_norton(d.grid);
          current = norton.injection - norton.admittance * vb;
          break;
        }
        case DeviceKind::machine:
          current = machine_injections[d.slot] - device_admittance(d) * vb;
          break;
        case DeviceKind::load: current = device_admittance(d) * vb; break;
        case DeviceKind::wind:
          if (!wind.empty()) current = wind_injection(wind[d.slot].id_rms, wind[d.slot].iq_rms, vb);
          break;
      }
    }
    sol.devices.push_back({current, complex_power(vb, current)});
  }
  return sol;
}

}  // namespace microgrid

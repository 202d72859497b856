#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace microgrid {

struct WindSample {
  double time;   // s
  double speed;  // m/s
};

/// Wind speed table with strictly increasing times.
struct WindSeries {
  std::vector<WindSample> samples;

  /// Linear interpolation, held constant outside the table. Throws
  /// std::invalid_argument on an empty series.
  double speed_at(double t) const;
};

enum class WindMappingKind { linear, cubic };

/// Converts wind speed to the active converter current.
struct WindMapping {
  WindMappingKind kind = WindMappingKind::linear;
  /// A/(m/s) for linear, A at v_ref for cubic.
  double gain = 0.9607;
  double v_ref = 12.0;  // m/s
  double i_max = 100.0;  // A

  void validate() const;
  double current(double speed) const;
};

/// id = mapping(speed(t)), clamped to [0, i_max].
double wind_current_at(const WindSeries& series, const WindMapping& mapping, double t);

/// Parses "time,speed_mps" rows after one header line. Throws
/// std::invalid_argument with the offending line number.
WindSeries parse_wind_series(std::string_view text);
WindSeries load_wind_series(const std::filesystem::path& path);

}  // namespace microgrid

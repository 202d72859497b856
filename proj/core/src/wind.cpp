#include "microgrid/wind.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace microgrid {

double WindSeries::speed_at(double t) const {
  if (samples.empty()) throw std::invalid_argument("wind series is empty");
  if (t <= samples.front().time) return samples.front().speed;
  if (t >= samples.back().time) return samples.back().speed;
  const auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double value, const WindSample& s) { return value < s.time; });
  const auto lo = hi - 1;
  const double w = (t - lo->time) / (hi->time - lo->time);
  return lo->speed + w * (hi->speed - lo->speed);
}

void WindMapping::validate() const {
  if (gain < 0.0) throw std::invalid_argument("wind mapping gain must be non-negative");
  if (!(i_max > 0.0)) throw std::invalid_argument("wind mapping i_max must be positive");
  if (kind == WindMappingKind::cubic && !(v_ref > 0.0))
    throw std::invalid_argument("cubic wind mapping needs a positive v_ref");
}

double WindMapping::current(double speed) const {
  double id = 0.0;
  if (kind == WindMappingKind::linear) {
    id = gain * speed;
  } else {
    const double ratio = speed / v_ref;
    id = gain * ratio * ratio * ratio;
  }
  return std::clamp(id, 0.0, i_max);
}

double wind_current_at(const WindSeries& series, const WindMapping& mapping, double t) {
  return mapping.current(series.speed_at(t));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

WindSeries parse_wind_series(std::string_view text) {
  WindSeries series;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++number;
    const auto content = trim(line);
    if (content.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = content.find(',');
    double t = 0.0;
    double v = 0.0;
    if (comma == std::string_view::npos || !parse_double(content.substr(0, comma), t) ||
        !parse_double(content.substr(comma + 1), v)) {
      throw std::invalid_argument("wind series line " + std::to_string(number) +
                                  ": expected 'time,speed_mps'");
    }
    if (!series.samples.empty() && !(t > series.samples.back().time))
      throw std::invalid_argument("wind series line " + std::to_string(number) +
                                  ": times must be strictly increasing");
    if (v < 0.0)
      throw std::invalid_argument("wind series line " + std::to_string(number) + ": negative wind speed");
    series.samples.push_back({t, v});
  }
  if (series.samples.empty()) throw std::invalid_argument("wind series is empty");
  return series;
}

WindSeries load_wind_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open wind series '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_wind_series(buffer.str());
}

}  // namespace microgrid

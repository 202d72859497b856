#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace microgrid {

/// Named columns over row-major numeric records.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws std::out_of_range for unknown names.
  std::size_t column(std::string_view name) const;
  std::vector<double> values(std::string_view name) const;
};

/// A Table whose first column is strictly increasing time, plus free-form
/// metadata (scenario hash, solver settings).
class TimeSeries {
 public:
  TimeSeries() = default;
  /// columns[0] is the time column.
  explicit TimeSeries(std::vector<std::string> columns);

  /// Throws std::invalid_argument on arity mismatch or non-increasing time.
  void append(std::vector<double> row);

  const Table& table() const noexcept { return table_; }
  const std::vector<std::string>& columns() const noexcept { return table_.columns; }
  const std::vector<std::vector<double>>& rows() const noexcept { return table_.rows; }
  std::size_t size() const noexcept { return table_.rows.size(); }
  bool empty() const noexcept { return table_.rows.empty(); }

  std::optional<std::size_t> find_column(std::string_view name) const { return table_.find_column(name); }
  std::size_t column(std::string_view name) const { return table_.column(name); }
  std::vector<double> values(std::string_view name) const { return table_.values(name); }
  std::vector<double> times() const;

  /// Value of a column at the last row with time <= t.
  double at(std::string_view name, double t) const;

  std::map<std::string, std::string> metadata;

 private:
  Table table_;
};

/// Per-column mean over the final `fraction` of rows (at least one row).
/// Throws std::invalid_argument on an empty series.
std::vector<double> steady_state(const Table& table, double fraction = 0.1);
double steady_value(const TimeSeries& ts, std::string_view column, double fraction = 0.1);

/// Header row then one line per record, 12 significant digits, '\n' line
/// ends. Returns bytes written.
std::size_t write_csv(const Table& table, std::ostream& out);
std::size_t write_csv(const TimeSeries& ts, std::ostream& out);
/// Throws std::runtime_error when the file cannot be written.
std::size_t write_csv(const TimeSeries& ts, const std::filesystem::path& path);
std::size_t write_csv(const Table& table, const std::filesystem::path& path);

/// Throws std::invalid_argument with a line number on malformed input.
TimeSeries read_csv(std::istream& in);
TimeSeries read_csv(const std::filesystem::path& path);

/// Writes the metadata map as a JSON object.
void write_metadata(const TimeSeries& ts, const std::filesystem::path& path);

/// Shortest text that carries 12 significant digits.
std::string format_number(double value);

}  // namespace microgrid

#include "microgrid/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace microgrid {

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t Table::column(std::string_view name) const {
  if (const auto i = find_column(name)) return *i;
  throw std::out_of_range("no column named '" + std::string(name) + "'");
}

std::vector<double> Table::values(std::string_view name) const {
  const auto c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

TimeSeries::TimeSeries(std::vector<std::string> columns) {
  if (columns.empty()) throw std::invalid_argument("a time series needs at least a time column");
  table_.columns = std::move(columns);
}

void TimeSeries::append(std::vector<double> row) {
  if (row.size() != table_.columns.size())
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " values, expected " +
                                std::to_string(table_.columns.size()));
  if (!table_.rows.empty() && !(row[0] > table_.rows.back()[0]))
    throw std::invalid_argument("time column must be strictly increasing");
  table_.rows.push_back(std::move(row));
}

std::vector<double> TimeSeries::times() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& r : rows()) out.push_back(r[0]);
  return out;
}

double TimeSeries::at(std::string_view name, double t) const {
  if (empty()) throw std::invalid_argument("empty time series");
  const auto c = column(name);
  const auto it = std::upper_bound(rows().begin(), rows().end(), t,
                                   [](double v, const std::vector<double>& r) { return v < r[0]; });
  if (it == rows().begin()) return rows().front()[c];
  return (*(it - 1))[c];
}

std::vector<double> steady_state(const Table& table, double fraction) {
  if (table.rows.empty()) throw std::invalid_argument("steady state of an empty table");
  const std::size_t n = table.rows.size();
  const auto count = std::clamp<std::size_t>(static_cast<std::size_t>(static_cast<double>(n) * fraction), 1, n);
  std::vector<double> mean(table.columns.size(), 0.0);
  for (std::size_t i = n - count; i < n; ++i)
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += table.rows[i][c];
  for (auto& v : mean) v /= static_cast<double>(count);
  return mean;
}

double steady_value(const TimeSeries& ts, std::string_view column, double fraction) {
  return steady_state(ts.table(), fraction)[ts.column(column)];
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::size_t write_csv(const Table& table, std::ostream& out) {
  std::string text;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) text += ',';
    text += table.columns[c];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) text += ',';
      text += format_number(row[c]);
    }
    text += '\n';
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("CSV write failed");
  return text.size();
}

std::size_t write_csv(const TimeSeries& ts, std::ostream& out) { return write_csv(ts.table(), out); }

namespace {

template <typename T>
std::size_t write_file(const T& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return write_csv(data, out);
}

}  // namespace

std::size_t write_csv(const TimeSeries& ts, const std::filesystem::path& path) { return write_file(ts, path); }
std::size_t write_csv(const Table& table, const std::filesystem::path& path) { return write_file(table, path); }

TimeSeries read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("line 1: missing header");
  std::vector<std::string> columns;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) columns.push_back(name);
  }
  TimeSeries ts(columns);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(columns.size());
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      double v = 0.0;
      const auto* first = line.data() + pos;
      const auto* last = line.data() + comma;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" +
                                    std::string(first, last) + "'");
      row.push_back(v);
      pos = comma + 1;
    }
    try {
      ts.append(std::move(row));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ts;
}

TimeSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path.string() + "'");
  return read_csv(in);
}

void write_metadata(const TimeSeries& ts, const std::filesystem::path& path) {
  nlohmann::json j(ts.metadata);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace microgrid

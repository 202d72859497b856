#include "microgrid/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace microgrid {
namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }
bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_source(std::string_view c) {
  return starts_with(c, "grid.") || starts_with(c, "machine.") || starts_with(c, "wind.");
}

double relative(double a, double b, double floor) { return std::abs(a - b) / std::max({std::abs(b), floor, 1.0}); }

}  // namespace

BalanceReport balance_report(const TimeSeries& ts, double after) {
  BalanceReport rep;
  rep.after = after;
  std::vector<std::size_t> p_src, p_ld, q_src, q_ld;
  for (std::size_t c = 0; c < ts.columns().size(); ++c) {
    const auto& name = ts.columns()[c];
    const bool load = starts_with(name, "load.");
    if (!load && !is_source(name)) continue;
    if (ends_with(name, ".P")) (load ? p_ld : p_src).push_back(c);
    if (ends_with(name, ".Q")) (load ? q_ld : q_src).push_back(c);
  }

  auto sum = [](const std::vector<double>& row, const std::vector<std::size_t>& cols) {
    double s = 0.0;
    for (auto c : cols) s += row[c];
    return s;
  };
  auto largest = [](const std::vector<double>& row, const std::vector<std::size_t>& cols) {
    double m = 0.0;
    for (auto c : cols) m = std::max(m, std::abs(row[c]));
    return m;
  };

  for (const auto& row : ts.rows()) {
    if (!(row[0] > after)) continue;
    const double ps = sum(row, p_src), pl = sum(row, p_ld);
    const double qs = sum(row, q_src), ql = sum(row, q_ld);
    rep.times.push_back(row[0]);
    rep.p_source.push_back(ps);
    rep.p_load.push_back(pl);
    rep.q_source.push_back(qs);
    rep.q_load.push_back(ql);
    const double rp = relative(ps, pl, largest(row, p_src));
    const double rq = relative(qs, ql, largest(row, q_src));
    rep.p_residual.push_back(rp);
    rep.q_residual.push_back(rq);
    rep.max_p_residual = std::max(rep.max_p_residual, rp);
    rep.max_q_residual = std::max(rep.max_q_residual, rq);
  }
  return rep;
}

void print(std::ostream& out, const BalanceReport& r, double tolerance) {
  out << "power balance after t = " << r.after << " s over " << r.times.size() << " samples\n";
  if (!r.times.empty()) {
    out << "  final  P source " << format_number(r.p_source.back()) << " W, load " << format_number(r.p_load.back())
        << " W\n";
    out << "  final  Q source " << format_number(r.q_source.back()) << " var, load "
        << format_number(r.q_load.back()) << " var\n";
  }
  out << "  max relative residual P " << format_number(r.max_p_residual) << ", Q " << format_number(r.max_q_residual)
      << " (tolerance " << format_number(tolerance) << ")\n";
}

bool TableReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const TableCheck& c) { return c.passed; });
}

namespace {

struct TableDef {
  std::string name;
  std::string title;
  std::vector<double> values;
  // Builds the parameter path from the scenario.
  std::function<std::string(const Scenario&)> parameter;
  // Result columns shown beside the swept value, with reference values per row.
  std::function<std::vector<std::string>(const Scenario&)> shown;
  std::vector<std::vector<double>> reference;
  std::function<void(const Scenario&, const SweepResult&, TableReport&)> assess;
};

const std::string& first_load(const Scenario& s) {
  if (s.loads.empty()) throw std::invalid_argument("scenario has no load");
  return s.loads.front().id;
}

std::pair<std::string, std::string> two_machines(const Scenario& s) {
  if (s.machines.size() < 2) throw std::invalid_argument("table needs a scenario with two machines");
  return {s.machines[0].id, s.machines[1].id};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Row indices ordered by the swept value.
std::vector<std::size_t> by_value(const SweepResult& r) {
  std::vector<std::size_t> idx(r.table.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.table.rows[a][0] < r.table.rows[b][0]; });
  return idx;
}

void check_monotonic(const SweepResult& r, const std::string& column, bool increasing, bool strict,
                     const std::string& what, TableReport& rep) {
  const auto idx = by_value(r);
  bool ok = true;
  std::string detail;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double prev = r.at(idx[k - 1], column);
    const double cur = r.at(idx[k], column);
    const double diff = increasing ? cur - prev : prev - cur;
    if (strict ? !(diff > 0.0) : diff < 0.0) {
      ok = false;
      detail = column + " " + fmt(prev) + " -> " + fmt(cur) + " between " + fmt(r.table.rows[idx[k - 1]][0]) +
               " and " + fmt(r.table.rows[idx[k]][0]);
      break;
    }
  }
  rep.checks.push_back({what, ok, detail});
}

const std::vector<TableDef>& definitions() {
  static const std::vector<TableDef> defs{
      {"t3_13",
       "Load angle against load resistance (resistive load)",
       {40, 50, 70, 15, 5},
       [](const Scenario& s) { return "load." + first_load(s) + ".r"; },
       [](const Scenario& s) {
         return std::vector<std::string>{"load." + first_load(s) + ".I", "machine." + s.machines.at(0).id + ".delta_deg"};
       },
       {{20, 1.16}, {16.2, 0.96}, {11.6, 0.73}, {52.96, 2.815}, {135, 8.214}},
       [](const Scenario& s, const SweepResult& r, TableReport& rep) {
         check_monotonic(r, "machine." + s.machines.at(0).id + ".delta_deg", false, true,
                         "load angle strictly decreasing in R", rep);
       }},
      {"t3_16",
       "Load angle against load resistance (resistive-inductive load)",
       {40, 50, 70, 5},
       [](const Scenario& s) { return "load." + first_load(s) + ".r"; },
       [](const Scenario& s) {
         return std::vector<std::string>{"load." + first_load(s) + ".I", "machine." + s.machines.at(0).id + ".delta_deg"};
       },
       {{66, 1.4}, {57, 1.2}, {43, 1.1}, {94, 4.34}},
       [](const Scenario& s, const SweepResult& r, TableReport& rep) {
         check_monotonic(r, "machine." + s.machines.at(0).id + ".delta_deg", false, true,
                         "load angle strictly decreasing in R", rep);
       }},
      {"t4_3",
       "Reactive power sharing against the first machine's voltage droop gain",
       {0.01, 0.05, 0.001},
       [](const Scenario& s) { return "machine." + two_machines(s).first + ".n_droop"; },
       [](const Scenario& s) {
         const auto [a, b] = two_machines(s);
         return std::vector<std::string>{"machine." + a + ".Q", "machine." + b + ".Q"};
       },
       {{1.05e5, 1.05e5}, {3.02e4, 1.51e5}, {2.5e5, 2.5e4}},
       [](const Scenario& s, const SweepResult& r, TableReport& rep) {
         const auto [a, b] = two_machines(s);
         const double k2 = s.machines[1].n_droop;
         for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
           const double k1 = r.table.rows[i][0];
           const double lhs = k1 * r.at(i, "machine." + a + ".Q");
           const double rhs = k2 * r.at(i, "machine." + b + ".Q");
           const double err = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-12);
           rep.checks.push_back({"K1 = " + fmt(k1) + ": Q1:Q2 = K2:K1 within 1e-4", err <= 1e-4,
                                 "relative error " + fmt(err)});
         }
       }},
      {"t4_4",
       "Active power sharing against the first machine's frequency droop gain",
       {0.01, 0.05, 0.001},
       [](const Scenario& s) { return "machine." + two_machines(s).first + ".m_droop"; },
       [](const Scenario& s) {
         const auto [a, b] = two_machines(s);
         return std::vector<std::string>{"machine." + a + ".P", "machine." + b + ".P"};
       },
       {{4.8e5, 4.8e5}, {4.7e5, 5e5}, {4.95e5, 4.75e5}},
       [](const Scenario& s, const SweepResult& r, TableReport& rep) {
         const auto [a, b] = two_machines(s);
         const double k2 = s.machines[1].m_droop;
         for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
           const double k1 = r.table.rows[i][0];
           const double p1 = r.at(i, "machine." + a + ".P");
           const double p2 = r.at(i, "machine." + b + ".P");
           if (k1 == k2) {
             const double err = std::abs(p1 - p2) / std::max(std::abs(p2), 1e-12);
             rep.checks.push_back({"K1 = K2: P1 = P2 within 1e-6", err <= 1e-6, "relative error " + fmt(err)});
           } else if (k1 > k2) {
             rep.checks.push_back({"K1 = " + fmt(k1) + " > K2: P1 < P2", p1 < p2, fmt(p1) + " vs " + fmt(p2)});
           } else {
             rep.checks.push_back({"K1 = " + fmt(k1) + " < K2: P1 > P2", p1 > p2, fmt(p1) + " vs " + fmt(p2)});
           }
         }
       }},
      {"t4_5",
       "Reactive power sharing against load inductance",
       {0.001, 0.1, 0.5},
       [](const Scenario& s) { return "load." + first_load(s) + ".l"; },
       [](const Scenario& s) {
         const auto [a, b] = two_machines(s);
         return std::vector<std::string>{"machine." + a + ".Q", "machine." + b + ".Q", "load." + first_load(s) + ".Q"};
       },
       {{1555, 1555, 3110}, {0.1e6, 0.1e6, 0.2e6}, {0.16e6, 0.16e6, 0.32e6}},
       [](const Scenario& s, const SweepResult& r, TableReport& rep) {
         const auto [a, b] = two_machines(s);
         for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
           const double q1 = r.at(i, "machine." + a + ".Q");
           const double q2 = r.at(i, "machine." + b + ".Q");
           const double err = std::abs(q1 - q2) / std::max(std::abs(q2), 1e-12);
           rep.checks.push_back({"L = " + fmt(r.table.rows[i][0]) + ": Q1 = Q2 within 1e-4", err <= 1e-4,
                                 "relative error " + fmt(err)});
         }
         check_monotonic(r, "machine." + a + ".Q", true, true, "Q1 strictly increasing in L", rep);
         check_monotonic(r, "machine." + b + ".Q", true, true, "Q2 strictly increasing in L", rep);
       }},
      {"t5_9",
       "Reactive power sharing against converter quadrature current",
       {0.01, 0.3, 0.5},
       [](const Scenario& s) {
         if (s.winds.empty()) throw std::invalid_argument("table needs a scenario with a wind source");
         return "wind." + s.winds.front().id + ".iq_rms";
       },
       [](const Scenario& s) {
         const auto [a, b] = two_machines(s);
         return std::vector<std::string>{"machine." + a + ".Q", "machine." + b + ".Q"};
       },
       {{1.39e5, 1.01e5}, {1.41e5, 1.04e5}, {1.43e5, 1.06e5}},
       [](const Scenario& s, const SweepResult& r, TableReport& rep) {
         const auto [a, b] = two_machines(s);
         check_monotonic(r, "machine." + a + ".Q", true, false, "Q1 nondecreasing in Iq", rep);
         check_monotonic(r, "machine." + b + ".Q", true, false, "Q2 nondecreasing in Iq", rep);
         for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
           double src = 0.0, load = 0.0, largest = 0.0;
           for (std::size_t c = 1; c < r.table.columns.size(); ++c) {
             const auto& name = r.table.columns[c];
             if (!ends_with(name, ".Q")) continue;
             const double q = r.table.rows[i][c];
             if (starts_with(name, "load.")) {
               load += q;
             } else {
               src += q;
               largest = std::max(largest, std::abs(q));
             }
           }
           const double err = relative(src, load, largest);
           rep.checks.push_back({"Iq = " + fmt(r.table.rows[i][0]) + ": reactive balance within 1e-3", err <= 1e-3,
                                 "relative residual " + fmt(err)});
         }
       }},
  };
  return defs;
}

}  // namespace

std::vector<std::string> table_names() {
  std::vector<std::string> names;
  for (const auto& d : definitions()) names.push_back(d.name);
  return names;
}

TableReport table_report(std::string_view name, const Scenario& scenario) {
  const auto& defs = definitions();
  const auto it = std::find_if(defs.begin(), defs.end(), [&](const TableDef& d) { return d.name == name; });
  if (it == defs.end()) throw std::invalid_argument("unknown table '" + std::string(name) + "'");
  const auto& def = *it;

  const std::string parameter = def.parameter(scenario);
  const auto shown = def.shown(scenario);
  const SweepResult result = sweep(scenario, parameter, def.values);

  TableReport rep;
  rep.name = def.name;
  rep.title = def.title;
  rep.table.columns.push_back(parameter);
  for (const auto& c : shown) rep.table.columns.push_back(c);
  for (const auto& c : shown) rep.table.columns.push_back(c + " (reference)");

  constexpr double kBand = 0.15;
  for (std::size_t i = 0; i < result.table.rows.size(); ++i) {
    std::vector<double> row{result.table.rows[i][0]};
    for (const auto& c : shown) row.push_back(result.at(i, c));
    for (std::size_t k = 0; k < shown.size(); ++k) {
      const double ref = def.reference[i][k];
      row.push_back(ref);
      const double ours = result.at(i, shown[k]);
      if (std::abs(ours - ref) > kBand * std::abs(ref))
        rep.band_notes.push_back(shown[k] + " at " + fmt(row[0]) + ": " + fmt(ours) + " vs reference " + fmt(ref));
    }
    rep.table.rows.push_back(std::move(row));
  }
  def.assess(scenario, result, rep);
  return rep;
}

void print(std::ostream& out, const TableReport& rep) {
  out << rep.name << ": " << rep.title << "\n\n";
  std::vector<int> width;
  for (const auto& c : rep.table.columns) width.push_back(std::max<int>(14, static_cast<int>(c.size())) + 2);
  for (std::size_t i = 0; i < width.size(); ++i) out << std::setw(width[i]) << rep.table.columns[i];
  out << '\n';
  for (const auto& row : rep.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << std::setw(width[i]) << fmt(row[i]);
    out << '\n';
  }
  out << "\nReference values come from a different machine model; they are shown for comparison with a ±15% band "
         "and not asserted.\n";
  for (const auto& n : rep.band_notes) out << "  outside band: " << n << '\n';
  out << '\n';
  for (const auto& c : rep.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.description << (c.detail.empty() ? "" : "  [" + c.detail + "]") << '\n';
  out << (rep.passed() ? "all checks passed" : "some checks failed") << '\n';
}

}  // namespace microgrid

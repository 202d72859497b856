#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "microgrid/scenario.hpp"

#ifndef MICROGRID_FIXTURE_DIR
#define MICROGRID_FIXTURE_DIR ""
#endif
#ifndef MICROGRID_INSTALL_FIXTURE_DIR
#define MICROGRID_INSTALL_FIXTURE_DIR ""
#endif

namespace microgrid {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

template <typename Spec>
using Setters = std::map<std::string, std::function<void(Spec&, double)>, std::less<>>;

const Setters<SimSettings>& sim_setters() {
  static const Setters<SimSettings> s{
      {"t_end", [](SimSettings& x, double v) { x.t_end = v; }},
      {"dt", [](SimSettings& x, double v) { x.integrator.dt = v; }},
      {"output_interval", [](SimSettings& x, double v) { x.output_interval = v; }},
      {"rel_tol", [](SimSettings& x, double v) { x.integrator.rel_tol = v; }},
      {"abs_tol", [](SimSettings& x, double v) { x.integrator.abs_tol = v; }},
      {"max_step", [](SimSettings& x, double v) { x.integrator.max_step = v; }},
  };
  return s;
}

const Setters<GridSourceParams>& grid_setters() {
  static const Setters<GridSourceParams> s{
      {"v_ll", [](GridSourceParams& x, double v) { x.v_ll = v; }},
      {"f", [](GridSourceParams& x, double v) { x.f = v; }},
      {"r", [](GridSourceParams& x, double v) { x.r = v; }},
      {"l", [](GridSourceParams& x, double v) { x.l = v; }},
  };
  return s;
}

const Setters<MachineSpec>& machine_setters() {
  static const Setters<MachineSpec> s{
      {"s_rated", [](MachineSpec& x, double v) { x.params.s_rated = v; }},
      {"v_ll", [](MachineSpec& x, double v) { x.params.v_rated_ll = v; }},
      {"f", [](MachineSpec& x, double v) { x.params.f_rated = v; }},
      {"poles", [](MachineSpec& x, double v) { x.params.poles = static_cast<int>(v); }},
      {"xs", [](MachineSpec& x, double v) { x.params.xs = v; }},
      {"h", [](MachineSpec& x, double v) { x.params.h_inertia = v; }},
      {"d", [](MachineSpec& x, double v) { x.params.d_damping = v; }},
      {"flux_nominal", [](MachineSpec& x, double v) { x.params.flux_nominal = v; }},
      {"flux0", [](MachineSpec& x, double v) { x.flux0 = v; }},
      {"delta0", [](MachineSpec& x, double v) { x.delta0_deg = v; }},
      {"p_mech", [](MachineSpec& x, double v) { x.p_mech = v; }},
      {"f0", [](MachineSpec& x, double v) { x.f0 = v; }},
      {"m_droop", [](MachineSpec& x, double v) { x.m_droop = v; }},
      {"p_nominal", [](MachineSpec& x, double v) { x.p_nominal = v; }},
      {"v0", [](MachineSpec& x, double v) { x.v0 = v; }},
      {"n_droop", [](MachineSpec& x, double v) { x.n_droop = v; }},
      {"q0", [](MachineSpec& x, double v) { x.q0 = v; }},
      {"kp_avr", [](MachineSpec& x, double v) { x.gains.kp_avr = v; }},
      {"ki_avr", [](MachineSpec& x, double v) { x.gains.ki_avr = v; }},
      {"t_field", [](MachineSpec& x, double v) { x.gains.t_field = v; }},
      {"t_gov", [](MachineSpec& x, double v) { x.gains.t_governor = v; }},
      {"tau_speed", [](MachineSpec& x, double v) { x.gains.tau_speed = v; }},
  };
  return s;
}

const Setters<LoadSpec>& load_setters() {
  static const Setters<LoadSpec> s{
      {"r", [](LoadSpec& x, double v) { x.params.r = v; }},
      {"l", [](LoadSpec& x, double v) { x.params.l = v; }},
  };
  return s;
}

const Setters<WindSpec>& wind_setters() {
  static const Setters<WindSpec> s{
      {"id_rms", [](WindSpec& x, double v) { x.id_rms = v; }},
      {"iq_rms", [](WindSpec& x, double v) { x.iq_rms = v; }},
      {"gain", [](WindSpec& x, double v) { x.mapping.gain = v; }},
      {"v_ref", [](WindSpec& x, double v) { x.mapping.v_ref = v; }},
      {"i_max", [](WindSpec& x, double v) { x.mapping.i_max = v; }},
  };
  return s;
}

const Setters<Event>& event_setters() {
  static const Setters<Event> s{
      {"time", [](Event& x, double v) { x.time = v; }},
      {"value", [](Event& x, double v) { x.value = v; }},
  };
  return s;
}

std::optional<bool> to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "closed") return true;
  if (s == "false" || s == "0" || s == "no" || s == "open") return false;
  return std::nullopt;
}

enum class Section { none, sim, grid, machine, load, wind, event, unknown };

class Parser {
 public:
  explicit Parser(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

  Scenario parse(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (!line.empty()) handle_line(line, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    finish();
    auto more = validate(s_);
    issues_.insert(issues_.end(), more.begin(), more.end());
    if (!issues_.empty()) {
      std::stable_sort(issues_.begin(), issues_.end(), [](const Issue& a, const Issue& b) { return a.line < b.line; });
      throw ValidationError(std::move(issues_));
    }
    return std::move(s_);
  }

 private:
  void error(int line, std::string message) { issues_.push_back({line, std::move(message)}); }

  void handle_line(std::string_view line, int n) {
    if (line.front() == '[') {
      if (line.back() != ']') {
        error(n, "malformed section header");
        section_ = Section::unknown;
        return;
      }
      open_section(trim(line.substr(1, line.size() - 2)), n);
      return;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      error(n, "expected key = value");
      return;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      error(n, "empty key");
      return;
    }
    if (section_ == Section::none) {
      error(n, "key '" + std::string(key) + "' outside of any section");
      return;
    }
    if (section_ == Section::unknown) return;
    const std::string where = "[" + section_name_ + "] ";
    if (!seen_keys_.insert(std::string(key)).second) {
      error(n, where + "duplicate key '" + std::string(key) + "'");
      return;
    }
    assign(key, value, n, where);
  }

  void open_section(std::string_view header, int n) {
    section_name_ = std::string(header);
    seen_keys_.clear();
    const auto dot = header.find('.');
    const auto kind = header.substr(0, dot);
    const std::string id = dot == std::string_view::npos ? std::string() : std::string(header.substr(dot + 1));
    const bool needs_id = kind == "machine" || kind == "load" || kind == "wind" || kind == "event";

    if (!sections_.insert(section_name_).second) {
      error(n, "duplicate section [" + section_name_ + "]");
      section_ = Section::unknown;
      return;
    }
    if (needs_id && id.empty()) {
      error(n, "section [" + std::string(kind) + "] needs an id, e.g. [" + std::string(kind) + ".name]");
      section_ = Section::unknown;
      return;
    }
    if (!needs_id && !id.empty()) {
      error(n, "section [" + std::string(kind) + "] takes no id");
      section_ = Section::unknown;
      return;
    }
    if (kind == "sim") {
      section_ = Section::sim;
    } else if (kind == "grid") {
      section_ = Section::grid;
      s_.grid = GridSpec{{}, n};
    } else if (kind == "machine") {
      section_ = Section::machine;
      MachineSpec m;
      m.id = id;
      m.line = n;
      s_.machines.push_back(std::move(m));
    } else if (kind == "load") {
      section_ = Section::load;
      s_.loads.push_back({id, {}, n});
      s_.loads.back().params.r = 0.0;
      s_.loads.back().params.l = 0.0;
    } else if (kind == "wind") {
      section_ = Section::wind;
      WindSpec w;
      w.id = id;
      w.line = n;
      s_.winds.push_back(std::move(w));
    } else if (kind == "event") {
      section_ = Section::event;
      Event e;
      e.name = id;
      e.line = n;
      s_.events.push_back(std::move(e));
      event_fields_.emplace_back();
    } else {
      error(n, "unknown section [" + section_name_ + "]");
      section_ = Section::unknown;
    }
  }

  template <typename Spec>
  bool set_number(const Setters<Spec>& table, Spec& spec, std::string_view key, std::string_view value, int n,
                  const std::string& where) {
    const auto it = table.find(key);
    if (it == table.end()) return false;
    if (const auto v = to_number(value)) {
      it->second(spec, *v);
    } else {
      error(n, where + "'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
    }
    return true;
  }

  bool set_connected(bool& target, std::string_view key, std::string_view value, int n, const std::string& where) {
    if (key != "connected") return false;
    if (const auto b = to_bool(value)) {
      target = *b;
    } else {
      error(n, where + "'connected' expects true or false, got '" + std::string(value) + "'");
    }
    return true;
  }

  void assign(std::string_view key, std::string_view value, int n, const std::string& where) {
    bool known = false;
    const std::string v(value);
    switch (section_) {
      case Section::sim:
        if (key == "method") {
          known = true;
          if (v == "rk4") s_.sim.integrator.method = IntegrationMethod::rk4;
          else if (v == "rk23") s_.sim.integrator.method = IntegrationMethod::rk23;
          else error(n, where + "method must be rk4 or rk23");
        } else if (key == "init") {
          known = true;
          if (v == "flat") s_.sim.init = InitMode::flat;
          else if (v == "steady") s_.sim.init = InitMode::steady;
          else error(n, where + "init must be flat or steady");
        } else {
          known = set_number(sim_setters(), s_.sim, key, value, n, where);
        }
        break;
      case Section::grid:
        known = set_number(grid_setters(), s_.grid->params, key, value, n, where) ||
                set_connected(s_.grid->params.connected, key, value, n, where);
        break;
      case Section::machine: {
        auto& m = s_.machines.back();
        if (key == "mode") {
          known = true;
          if (v == "const_power") m.mode = FrequencyMode::const_power;
          else if (v == "speed_ref") m.mode = FrequencyMode::speed_ref;
          else if (v == "droop") m.mode = FrequencyMode::droop;
          else error(n, where + "mode must be const_power, speed_ref or droop");
        } else if (key == "avr") {
          known = true;
          if (v == "pi") m.avr = AvrMode::pi;
          else if (v == "fixed") m.avr = AvrMode::fixed;
          else if (v == "droop") m.avr = AvrMode::droop;
          else error(n, where + "avr must be pi, fixed or droop");
        } else {
          known = set_number(machine_setters(), m, key, value, n, where);
          if (known && key == "poles") {
            const auto p = to_number(value);
            if (p && *p != static_cast<double>(static_cast<int>(*p))) error(n, where + "poles must be an integer");
          }
        }
        break;
      }
      case Section::load:
        known = set_number(load_setters(), s_.loads.back(), key, value, n, where) ||
                set_connected(s_.loads.back().params.connected, key, value, n, where);
        break;
      case Section::wind: {
        auto& w = s_.winds.back();
        if (key == "series_file") {
          known = true;
          w.series_file = v;
        } else if (key == "mapping") {
          known = true;
          if (v == "linear") w.mapping.kind = WindMappingKind::linear;
          else if (v == "cubic") w.mapping.kind = WindMappingKind::cubic;
          else error(n, where + "mapping must be linear or cubic");
        } else {
          known = set_number(wind_setters(), w, key, value, n, where) ||
                  set_connected(w.connected, key, value, n, where);
        }
        break;
      }
      case Section::event: {
        auto& e = s_.events.back();
        event_fields_.back().insert(std::string(key));
        if (key == "target") {
          known = true;
          e.target = v;
        } else if (key == "action") {
          known = true;
          if (v == "close_switch") e.action = EventAction::close_switch;
          else if (v == "open_switch") e.action = EventAction::open_switch;
          else if (v == "set_mech_power") e.action = EventAction::set_mech_power;
          else if (v == "set_iq") e.action = EventAction::set_iq;
          else if (v == "set_id") e.action = EventAction::set_id;
          else error(n, where + "unknown action '" + v + "'");
        } else {
          known = set_number(event_setters(), e, key, value, n, where);
        }
        break;
      }
      case Section::none:
      case Section::unknown:
        return;
    }
    if (!known) error(n, where + "unknown key '" + std::string(key) + "'");
  }

  void finish() {
    for (std::size_t i = 0; i < s_.events.size(); ++i) {
      const auto& e = s_.events[i];
      for (const char* required : {"time", "action", "target"})
        if (!event_fields_[i].count(required))
          error(e.line, "event '" + e.name + "': missing '" + required + "'");
      const bool needs_value = e.action == EventAction::set_mech_power || e.action == EventAction::set_iq ||
                               e.action == EventAction::set_id;
      if (needs_value && !event_fields_[i].count("value"))
        error(e.line, "event '" + e.name + "': action " + std::string(to_string(e.action)) + " needs a value");
    }
    std::stable_sort(s_.events.begin(), s_.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });

    for (auto& w : s_.winds) {
      if (w.series_file.empty()) continue;
      std::filesystem::path p(w.series_file);
      if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
      try {
        w.series = load_wind_series(p);
      } catch (const std::exception& ex) {
        error(w.line, "wind '" + w.id + "': " + ex.what());
      }
    }
  }

  std::filesystem::path base_dir_;
  Scenario s_;
  std::vector<Issue> issues_;
  Section section_ = Section::none;
  std::string section_name_;
  std::set<std::string> sections_;
  std::set<std::string> seen_keys_;
  std::vector<std::set<std::string>> event_fields_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  return Parser(base_dir).parse(text);
}

std::filesystem::path find_fixture(std::string_view name) {
  const std::string file = std::string(name) + ".scn";
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("MICROGRID_FIXTURES"); env && *env) dirs.emplace_back(env);
  if (*MICROGRID_FIXTURE_DIR) dirs.emplace_back(MICROGRID_FIXTURE_DIR);
  if (*MICROGRID_INSTALL_FIXTURE_DIR) dirs.emplace_back(MICROGRID_INSTALL_FIXTURE_DIR);
  for (const auto& d : dirs) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(d / file, ec)) return d / file;
  }
  throw std::invalid_argument("no scenario file or bundled fixture named '" + std::string(name) + "'");
}

Scenario load_scenario(std::string_view name_or_path) {
  std::filesystem::path path(name_or_path);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) path = find_fixture(name_or_path);
  Scenario s = parse_scenario(read_file(path), path.parent_path());
  s.name = path.stem().string();
  return s;
}

void set_parameter(Scenario& s, std::string_view path, double value) {
  const std::string p(path);
  auto fail = [&]() -> void { throw std::invalid_argument("parameter path '" + p + "' does not resolve"); };

  const auto first = path.find('.');
  if (first == std::string_view::npos) fail();
  const auto kind = path.substr(0, first);
  const auto rest = path.substr(first + 1);

  if (kind == "sim" || kind == "grid") {
    if (kind == "sim") {
      const auto it = sim_setters().find(rest);
      if (it == sim_setters().end()) fail();
      it->second(s.sim, value);
    } else {
      if (!s.grid) fail();
      const auto it = grid_setters().find(rest);
      if (it == grid_setters().end()) fail();
      it->second(s.grid->params, value);
    }
    return;
  }

  const auto second = rest.rfind('.');
  if (second == std::string_view::npos) fail();
  const auto id = rest.substr(0, second);
  const auto key = rest.substr(second + 1);

  auto apply = [&](auto& items, const auto& table, auto id_of) {
    for (auto& item : items) {
      if (id_of(item) != id) continue;
      const auto it = table.find(key);
      if (it == table.end()) fail();
      it->second(item, value);
      return;
    }
    fail();
  };

  if (kind == "machine") {
    apply(s.machines, machine_setters(), [](const MachineSpec& m) { return std::string_view(m.id); });
  } else if (kind == "load") {
    apply(s.loads, load_setters(), [](const LoadSpec& l) { return std::string_view(l.id); });
  } else if (kind == "wind") {
    apply(s.winds, wind_setters(), [](const WindSpec& w) { return std::string_view(w.id); });
    if (key == "id_rms")
      for (auto& w : s.winds)
        if (w.id == id) w.series.reset();
  } else if (kind == "event") {
    apply(s.events, event_setters(), [](const Event& e) { return std::string_view(e.name); });
    std::stable_sort(s.events.begin(), s.events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  } else {
    fail();
  }
}

}  // namespace microgrid

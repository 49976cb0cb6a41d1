#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "triqnet/device.hpp"
#include "triqnet/errors.hpp"

// Run configuration: TOML file with [qubits.<label>], [channels.<label>],
// [simulation] and [experiment] sections. Every omitted value falls back to
// the device-table defaults compiled into the binary. The resolved config
// serializes canonically (sorted sections and keys), which makes the config
// hash stable under key reordering in the input file.
namespace triqnet::config {

using TomlValue = std::variant<std::int64_t, double, std::string, bool>;
using TomlTable = std::map<std::string, TomlValue>;  // flattened "section.key"

//==========================================================================
// Minimal TOML subset: tables, scalar key/value pairs, # comments
//==========================================================================

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline TomlValue parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw UsageError("config line " + std::to_string(line_no) + ": missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw UsageError("config line " + std::to_string(line_no) + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.find_first_of(".eE") == std::string::npos || (v.size() > 2 && v[0] == '0' && v[1] == 'x')) {
    std::int64_t iv = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), iv);
    if (res.ec == std::errc{} && res.ptr == v.data() + v.size()) return iv;
  }
  double dv = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), dv);
  if (res.ec == std::errc{} && res.ptr == v.data() + v.size()) return dv;
  throw UsageError("config line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

inline std::string format_value(const TomlValue& v) {
  char buf[40];
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), *i);
    return std::string(buf, res.ptr);
  }
  if (const auto* d = std::get_if<double>(&v)) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), *d);
    std::string s(buf, res.ptr);
    // Keep floats recognizable as floats on re-parse.
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  }
  return "\"" + std::get<std::string>(v) + "\"";
}

}  // namespace detail

inline TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw UsageError("config line " + std::to_string(line_no) + ": malformed table header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw UsageError("config line " + std::to_string(line_no) + ": empty table name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty())
      throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    table[full] = detail::parse_value(line.substr(eq + 1), line_no);
  }
  return table;
}

// Canonical form: keys grouped by section, both sorted (std::map order).
inline std::string serialize_toml(const TomlTable& table) {
  std::map<std::string, std::map<std::string, const TomlValue*>> sections;
  for (const auto& [full, value] : table) {
    const auto dot = full.rfind('.');
    if (dot == std::string::npos)
      sections[""][full] = &value;
    else
      sections[full.substr(0, dot)][full.substr(dot + 1)] = &value;
  }
  std::string out;
  for (const auto& [section, keys] : sections) {
    if (!section.empty()) out += "[" + section + "]\n";
    for (const auto& [key, value] : keys)
      out += key + " = " + detail::format_value(*value) + "\n";
  }
  return out;
}

//==========================================================================
// Resolved configuration
//==========================================================================

struct SimulationConfig {
  std::string tier = "device";  // device | circuit | ideal
  double dt_ns = 0.05;
  std::uint64_t shots = 10000;
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  double theta_e = M_PI / 2.0;
  std::uint64_t theta_points = 9;     // sweep grid on [0, pi/2]
  std::uint64_t phi_points = 17;      // sweep grid on [-pi, pi]
  std::uint64_t rounds_per_point = 20000;
};

struct Config {
  std::vector<device::QubitParams> qubits = device::default_qubits();
  std::vector<device::ChannelParams> channels = device::default_channels();
  SimulationConfig simulation;
  ExperimentConfig experiment;

  void validate() const {
    for (const auto& q : qubits) q.validate();
    for (const auto& ch : channels) ch.validate();
    if (simulation.tier != "device" && simulation.tier != "circuit" && simulation.tier != "ideal")
      throw UsageError("config: tier must be device, circuit, or ideal");
    if (simulation.dt_ns <= 0.0) throw UsageError("config: dt_ns must be positive");
    if (simulation.shots < 1 || simulation.rounds < 1)
      throw UsageError("config: shots and rounds must be at least 1");
  }
};

namespace detail {

inline double as_double(const TomlValue& v, const std::string& key) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw UsageError("config: " + key + " must be a number");
}

inline std::uint64_t as_u64(const TomlValue& v, const std::string& key) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    if (*i < 0) throw UsageError("config: " + key + " must be non-negative");
    return static_cast<std::uint64_t>(*i);
  }
  throw UsageError("config: " + key + " must be an integer");
}

inline std::string as_string(const TomlValue& v, const std::string& key) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw UsageError("config: " + key + " must be a string");
}

}  // namespace detail

inline Config config_from_table(const TomlTable& table) {
  Config cfg;
  auto find_qubit = [&](const std::string& label) -> device::QubitParams& {
    for (auto& q : cfg.qubits)
      if (q.label == label) return q;
    throw UsageError("config: unknown qubit section " + label);
  };
  auto find_channel = [&](const std::string& label) -> device::ChannelParams& {
    for (auto& ch : cfg.channels)
      if (ch.label == label) return ch;
    throw UsageError("config: unknown channel section " + label);
  };

  for (const auto& [full, value] : table) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t dot = full.find('.'); dot != std::string::npos;
         dot = full.find('.', start)) {
      parts.push_back(full.substr(start, dot - start));
      start = dot + 1;
    }
    parts.push_back(full.substr(start));

    if (parts.size() == 3 && parts[0] == "qubits") {
      device::QubitParams& q = find_qubit(parts[1]);
      const std::string& key = parts[2];
      if (key == "omega_q_ghz") q.omega_q_ghz = detail::as_double(value, full);
      else if (key == "t1_us") q.t1_us = detail::as_double(value, full);
      else if (key == "t2_us") q.t2_us = detail::as_double(value, full);
      else if (key == "f_g") q.f_g = detail::as_double(value, full);
      else if (key == "f_e") q.f_e = detail::as_double(value, full);
      else if (key == "alpha_ghz") q.alpha_ghz = detail::as_double(value, full);
      else if (key == "chi_ge_mhz") q.chi_ge_mhz = detail::as_double(value, full);
      else if (key == "tau_rr_ns") q.tau_rr_ns = detail::as_double(value, full);
      else if (key == "f_1q") q.f_1q = detail::as_double(value, full);
      else throw UsageError("config: unknown qubit key " + full);
    } else if (parts.size() == 3 && parts[0] == "channels") {
      device::ChannelParams& ch = find_channel(parts[1]);
      const std::string& key = parts[2];
      if (key == "omega_c_ghz") ch.omega_c_ghz = detail::as_double(value, full);
      else if (key == "t1_us") ch.t1_us = detail::as_double(value, full);
      else if (key == "t2_us") ch.t2_us = detail::as_double(value, full);
      else if (key == "modes") ch.modes = static_cast<int>(detail::as_u64(value, full));
      else if (key == "fsr_mhz") ch.fsr_mhz = detail::as_double(value, full);
      else if (key == "g1_mhz") ch.g1_mhz = detail::as_double(value, full);
      else if (key == "g2_mhz") ch.g2_mhz = detail::as_double(value, full);
      else throw UsageError("config: unknown channel key " + full);
    } else if (parts.size() == 2 && parts[0] == "simulation") {
      const std::string& key = parts[1];
      if (key == "tier") cfg.simulation.tier = detail::as_string(value, full);
      else if (key == "dt_ns") cfg.simulation.dt_ns = detail::as_double(value, full);
      else if (key == "shots") cfg.simulation.shots = detail::as_u64(value, full);
      else if (key == "rounds") cfg.simulation.rounds = detail::as_u64(value, full);
      else if (key == "seed") cfg.simulation.seed = detail::as_u64(value, full);
      else throw UsageError("config: unknown simulation key " + full);
    } else if (parts.size() == 2 && parts[0] == "experiment") {
      const std::string& key = parts[1];
      if (key == "theta_e") cfg.experiment.theta_e = detail::as_double(value, full);
      else if (key == "theta_points") cfg.experiment.theta_points = detail::as_u64(value, full);
      else if (key == "phi_points") cfg.experiment.phi_points = detail::as_u64(value, full);
      else if (key == "rounds_per_point")
        cfg.experiment.rounds_per_point = detail::as_u64(value, full);
      else throw UsageError("config: unknown experiment key " + full);
    } else {
      throw UsageError("config: unknown key " + full);
    }
  }
  cfg.validate();
  return cfg;
}

inline TomlTable table_from_config(const Config& cfg) {
  TomlTable t;
  for (const auto& q : cfg.qubits) {
    const std::string p = "qubits." + q.label + ".";
    t[p + "omega_q_ghz"] = q.omega_q_ghz;
    t[p + "t1_us"] = q.t1_us;
    t[p + "t2_us"] = q.t2_us;
    t[p + "f_g"] = q.f_g;
    t[p + "f_e"] = q.f_e;
    t[p + "alpha_ghz"] = q.alpha_ghz;
    t[p + "chi_ge_mhz"] = q.chi_ge_mhz;
    t[p + "tau_rr_ns"] = q.tau_rr_ns;
    t[p + "f_1q"] = q.f_1q;
  }
  for (const auto& ch : cfg.channels) {
    const std::string p = "channels." + ch.label + ".";
    t[p + "omega_c_ghz"] = ch.omega_c_ghz;
    t[p + "t1_us"] = ch.t1_us;
    t[p + "t2_us"] = ch.t2_us;
    t[p + "modes"] = static_cast<std::int64_t>(ch.modes);
    t[p + "fsr_mhz"] = ch.fsr_mhz;
    t[p + "g1_mhz"] = ch.g1_mhz;
    t[p + "g2_mhz"] = ch.g2_mhz;
  }
  t["simulation.tier"] = cfg.simulation.tier;
  t["simulation.dt_ns"] = cfg.simulation.dt_ns;
  t["simulation.shots"] = static_cast<std::int64_t>(cfg.simulation.shots);
  t["simulation.rounds"] = static_cast<std::int64_t>(cfg.simulation.rounds);
  t["simulation.seed"] = static_cast<std::int64_t>(cfg.simulation.seed);
  t["experiment.theta_e"] = cfg.experiment.theta_e;
  t["experiment.theta_points"] = static_cast<std::int64_t>(cfg.experiment.theta_points);
  t["experiment.phi_points"] = static_cast<std::int64_t>(cfg.experiment.phi_points);
  t["experiment.rounds_per_point"] = static_cast<std::int64_t>(cfg.experiment.rounds_per_point);
  return t;
}

inline Config load_config_text(const std::string& text) {
  return config_from_table(parse_toml(text));
}

inline Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str());
}

inline std::string serialize_config(const Config& cfg) {
  return serialize_toml(table_from_config(cfg));
}

// FNV-1a over the canonical serialization; stable under key reordering.
inline std::string config_hash(const Config& cfg) {
  const std::string canon = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace triqnet::config

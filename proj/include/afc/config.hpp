#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "afc/errors.hpp"
#include "afc/sim.hpp"

namespace afc {

// Lossless text form of a double (17 significant digits round-trip exactly).
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

inline double parse_double(std::string_view text, const std::string& key) {
  const std::string_view t = trim(text);
  double value = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
  return value;
}

inline std::vector<double> parse_double_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  std::size_t start = 0;
  const std::string s(text);
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                  : comma - start);
    out.push_back(parse_double(piece, key));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_bool(std::string_view text, const std::string& key) {
  const std::string_view t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(key, "expected true/false, got '" + std::string(text) + "'");
}

inline std::string join_doubles(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ',';
    out += format_double(vs[i]);
  }
  return out;
}

}  // namespace detail

// Assign one key = value pair; throws ConfigError naming the key on unknown
// keys or malformed values.
inline void apply_config_key(SimConfig& cfg, const std::string& key,
                             std::string_view value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_double_list;
  if (key == "t_end") cfg.t_end = parse_double(value, key);
  else if (key == "plant_rate") cfg.plant_rate = parse_double(value, key);
  else if (key == "control_rate") cfg.control_rate = parse_double(value, key);
  else if (key == "x0") cfg.x0 = parse_double_list(value, key);
  else if (key == "mu") cfg.mu = parse_double(value, key);
  else if (key == "b") cfg.b = parse_double(value, key);
  else if (key == "m") cfg.m = parse_double(value, key);
  else if (key == "delta_l") cfg.delta_l = parse_double(value, key);
  else if (key == "delta_r") cfg.delta_r = parse_double(value, key);
  else if (key == "lambda") cfg.lambda = parse_double(value, key);
  else if (key == "kappa") cfg.kappa = parse_double(value, key);
  else if (key == "phi") cfg.phi = parse_double(value, key);
  else if (key == "centers") cfg.centers = parse_double_list(value, key);
  else if (key == "log_dhat") cfg.log_dhat = parse_bool(value, key);
  else if (key == "seedless") cfg.seedless = parse_bool(value, key);
  else throw ConfigError(key, "unknown key");
}

// Flat `key = value` format, one pair per line, '#' starts a comment.
// Does not validate cross-field invariants; call cfg.validate() after any
// command-line overrides have been applied.
inline SimConfig parse_config_text(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value', got '" + std::string(stripped) + "'");
    const std::string key{detail::trim(stripped.substr(0, eq))};
    apply_config_key(cfg, key, stripped.substr(eq + 1));
  }
  return cfg;
}

inline SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

// Every key with its resolved value, in the canonical order of the config
// format. Used for the manifest echo and for writing config files.
inline std::vector<std::pair<std::string, std::string>> config_entries(
    const SimConfig& cfg) {
  using detail::join_doubles;
  return {
      {"t_end", format_double(cfg.t_end)},
      {"plant_rate", format_double(cfg.plant_rate)},
      {"control_rate", format_double(cfg.control_rate)},
      {"x0", join_doubles(cfg.x0)},
      {"mu", format_double(cfg.mu)},
      {"b", format_double(cfg.b)},
      {"m", format_double(cfg.m)},
      {"delta_l", format_double(cfg.delta_l)},
      {"delta_r", format_double(cfg.delta_r)},
      {"lambda", format_double(cfg.lambda)},
      {"kappa", format_double(cfg.kappa)},
      {"phi", format_double(cfg.phi)},
      {"centers", join_doubles(cfg.centers)},
      {"log_dhat", cfg.log_dhat ? "true" : "false"},
      {"seedless", cfg.seedless ? "true" : "false"},
  };
}

inline std::string config_to_text(const SimConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : config_entries(cfg))
    out += key + " = " + value + "\n";
  return out;
}

// Sweep parameter assignment; the accepted names are the sweepable subset of
// the config keys.
inline void set_sweep_parameter(SimConfig& cfg, const std::string& name, double value) {
  if (name == "kappa") cfg.kappa = value;
  else if (name == "phi") cfg.phi = value;
  else if (name == "lambda") cfg.lambda = value;
  else if (name == "delta_l") cfg.delta_l = value;
  else if (name == "delta_r") cfg.delta_r = value;
  else if (name == "mu") cfg.mu = value;
  else if (name == "m") cfg.m = value;
  else if (name == "b") cfg.b = value;
  else throw ConfigError(name, "not a sweepable parameter");
}

}  // namespace afc

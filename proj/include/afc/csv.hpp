#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "afc/config.hpp"
#include "afc/errors.hpp"
#include "afc/sim.hpp"

namespace afc {

inline constexpr const char* kTimeseriesHeader =
    "t,x,xdot,xd,xddot,u,upsilon,uhat,epsilon,dhat,dtrue";

// Writes the closed-loop log. Values carry 17 significant digits so a parse
// of the file reproduces the records bit-for-bit. rule_output_columns adds
// Dhat_1..Dhat_N columns; pass 0 when rule outputs were not logged.
inline void write_timeseries_csv(std::ostream& os, std::span<const SimRecord> records,
                                 std::size_t rule_output_columns) {
  os << kTimeseriesHeader;
  for (std::size_t r = 1; r <= rule_output_columns; ++r) os << ",Dhat_" << r;
  os << '\n';
  for (const auto& rec : records) {
    os << format_double(rec.t) << ',' << format_double(rec.state[0]) << ','
       << format_double(rec.state[1]) << ',' << format_double(rec.reference[0]) << ','
       << format_double(rec.reference[1]) << ',' << format_double(rec.u) << ','
       << format_double(rec.upsilon) << ',' << format_double(rec.uhat) << ','
       << format_double(rec.epsilon) << ',' << format_double(rec.dhat) << ','
       << format_double(rec.dtrue);
    for (std::size_t r = 0; r < rule_output_columns; ++r)
      os << ',' << format_double(rec.rule_outputs[r]);
    os << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

// Parses a timeseries written by write_timeseries_csv. The error vector is
// rebuilt as state - reference, the same expression the runner used.
inline std::vector<SimRecord> read_timeseries_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("timeseries", "empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  const auto expected = detail::split_csv_line(kTimeseriesHeader);
  if (header.size() < expected.size())
    throw ConfigError("timeseries", "header has too few columns");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (header[i] != expected[i])
      throw ConfigError("timeseries", "unexpected column '" + header[i] + "'");
  const std::size_t rule_columns = header.size() - expected.size();
  for (std::size_t r = 0; r < rule_columns; ++r)
    if (header[expected.size() + r] != "Dhat_" + std::to_string(r + 1))
      throw ConfigError("timeseries", "unexpected column '" + header[expected.size() + r] + "'");

  std::vector<SimRecord> records;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ConfigError("timeseries", "row " + std::to_string(row) +
                                          " has wrong number of fields");
    const std::string key = "timeseries row " + std::to_string(row);
    auto get = [&](std::size_t i) { return detail::parse_double(fields[i], key); };

    SimRecord rec;
    rec.t = get(0);
    rec.state = {get(1), get(2)};
    rec.reference = {get(3), get(4)};
    rec.error = {rec.state[0] - rec.reference[0], rec.state[1] - rec.reference[1]};
    rec.u = get(5);
    rec.upsilon = get(6);
    rec.uhat = get(7);
    rec.epsilon = get(8);
    rec.dhat = get(9);
    rec.dtrue = get(10);
    rec.rule_outputs.resize(rule_columns);
    for (std::size_t r = 0; r < rule_columns; ++r) rec.rule_outputs[r] = get(11 + r);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace afc

#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "afc/config.hpp"
#include "afc/csv.hpp"
#include "afc/errors.hpp"
#include "afc/metrics.hpp"
#include "afc/sim.hpp"
#include "afc/verify.hpp"

namespace afc {

inline std::string iso_timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Reproducibility sidecar for every emitted CSV: the fully resolved config,
// wall-clock interval, output paths and a metric summary, as key = value lines.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(std::string key, std::string value) {
    entries.emplace_back(std::move(key), std::move(value));
  }

  void add_config(const SimConfig& cfg) {
    for (auto& [key, value] : config_entries(cfg)) add(key, value);
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  }
};

// Runs one experiment and writes timeseries.csv + manifest.txt into out_dir.
// Exit codes: 0 ok, 2 invalid config, 3 divergence.
inline int cmd_simulate(const SimConfig& cfg, const std::filesystem::path& out_dir,
                        std::ostream& diag) {
  RunManifest manifest;
  manifest.add("started_at", iso_timestamp_utc());
  std::vector<SimRecord> records;
  try {
    cfg.validate();
    SimConfig run_cfg = cfg;
    run_cfg.log_dhat = true;  // snapshots feed the manifest's V metric
    records = run_closed_loop(run_cfg);
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DivergenceError& e) {
    diag << "divergence: " << e.what() << '\n';
    return 3;
  }

  std::filesystem::create_directories(out_dir);
  const auto csv_path = out_dir / "timeseries.csv";
  const auto manifest_path = out_dir / "manifest.txt";
  {
    std::ofstream csv(csv_path, std::ios::binary);
    write_timeseries_csv(csv, records, cfg.log_dhat ? cfg.centers.size() : 0);
  }

  manifest.add_config(cfg);
  manifest.add("records", std::to_string(records.size()));
  manifest.add("output_timeseries", csv_path.string());

  const double quarter = cfg.t_end / 4.0;
  manifest.add("metric_rms_xtilde_first_quarter",
               format_double(rms_tracking_error(records, {0.0, quarter})));
  manifest.add("metric_rms_xtilde_last_quarter",
               format_double(rms_tracking_error(records, {cfg.t_end - quarter, cfg.t_end})));
  manifest.add("metric_rms_xtilde_full",
               format_double(rms_tracking_error(records, {0.0, cfg.t_end})));
  manifest.add("metric_max_abs_epsilon",
               format_double(max_abs_epsilon(records, {0.0, cfg.t_end})));
  if (cfg.phi > 0.0 && !records.empty()) {
    const DeadZone dz(cfg.m, cfg.delta_l, cfg.delta_r);
    const auto partition = FuzzyPartition::from_centers(cfg.centers);
    const auto fit = fit_residual_outputs(dz, partition, -1.5, 1.5, 3001);
    const ControllerGains gains{cfg.kappa, cfg.phi, cfg.b, cfg.m};
    const auto series =
        lyapunov_series(records, fit.rule_outputs, partition, gains, 1.0 / cfg.control_rate);
    manifest.add("metric_final_v", format_double(series.v.back()));
    manifest.add("metric_fit_grid_max_error", format_double(fit.grid_max_error));
  } else {
    manifest.add("metric_final_v", "n/a");
  }
  manifest.add("finished_at", iso_timestamp_utc());
  manifest.write(manifest_path);

  diag << "wrote " << csv_path.string() << " (" << records.size() << " records)\n";
  return 0;
}

// Runs the numeric invariant suite and prints one line per property.
// Exit code 0 iff every property passed.
inline int cmd_verify(const SimConfig& cfg, std::ostream& out) {
  std::vector<PropertyResult> results;
  try {
    results = run_property_suite(cfg);
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << '\n';
    return 2;
  }
  bool all_ok = true;
  for (const auto& res : results) {
    out << (res.passed ? "[PASS] " : "[FAIL] ") << res.name << " — " << res.detail
        << '\n';
    all_ok = all_ok && res.passed;
  }
  out << (all_ok ? "all properties passed\n" : "property failures detected\n");
  return all_ok ? 0 : 1;
}

// One closed-loop run per value of a single swept parameter; emits a metric
// table sweep.csv plus its manifest. Exit codes as for simulate.
inline int cmd_sweep(const SimConfig& base, const std::string& param,
                     const std::vector<double>& values,
                     const std::filesystem::path& out_dir, std::ostream& diag) {
  RunManifest manifest;
  manifest.add("started_at", iso_timestamp_utc());

  struct Row {
    double value;
    double rms_late;
    double max_u;
    bool converged;
  };
  std::vector<Row> rows;
  try {
    {
      SimConfig probe = base;  // reject unknown parameters before running
      set_sweep_parameter(probe, param, values.empty() ? 0.0 : values.front());
    }
    for (const double value : values) {
      SimConfig cfg = base;
      set_sweep_parameter(cfg, param, value);
      cfg.validate();
      const auto records = run_closed_loop(cfg);
      const double quarter = cfg.t_end / 4.0;
      rows.push_back({value,
                      rms_tracking_error(records, {cfg.t_end - quarter, cfg.t_end}),
                      max_abs_control(records, {0.0, cfg.t_end}),
                      epsilon_converged(records)});
    }
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DivergenceError& e) {
    diag << "divergence: " << e.what() << '\n';
    return 3;
  }

  std::filesystem::create_directories(out_dir);
  const auto csv_path = out_dir / "sweep.csv";
  {
    std::ofstream csv(csv_path, std::ios::binary);
    csv << "value,rms_xtilde,max_abs_u,epsilon_converged\n";
    for (const auto& row : rows)
      csv << format_double(row.value) << ',' << format_double(row.rms_late) << ','
          << format_double(row.max_u) << ',' << (row.converged ? "true" : "false")
          << '\n';
  }

  manifest.add_config(base);
  manifest.add("sweep_param", param);
  manifest.add("sweep_values", detail::join_doubles(values));
  manifest.add("output_sweep", csv_path.string());
  manifest.add("finished_at", iso_timestamp_utc());
  manifest.write(out_dir / "manifest.txt");

  diag << "wrote " << csv_path.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

}  // namespace afc

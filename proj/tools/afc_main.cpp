#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "afc/cli.hpp"
#include "afc/config.hpp"

namespace {

// Flag overrides are collected as raw (key, value) strings and pushed
// through the same assignment path as the config file, so a malformed flag
// value reports the offending key on exit code 2 like any other bad config.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> pairs;

  void attach(CLI::App* cmd) {
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"--t-end", "t_end"},           {"--plant-rate", "plant_rate"},
        {"--control-rate", "control_rate"}, {"--x0", "x0"},
        {"--mu", "mu"},                 {"--b", "b"},
        {"--m", "m"},                   {"--delta-l", "delta_l"},
        {"--delta-r", "delta_r"},       {"--lambda", "lambda"},
        {"--kappa", "kappa"},           {"--phi", "phi"},
        {"--centers", "centers"},       {"--log-dhat", "log_dhat"},
        {"--seedless", "seedless"},
    };
    for (const auto& [flag, key] : flags) {
      const std::string k = key;
      cmd->add_option_function<std::string>(
             flag,
             [this, k](const std::string& v) { pairs.emplace_back(k, v); },
             "override config key " + k)
          ->expected(1);
    }
  }
};

afc::SimConfig resolve_config(const std::optional<std::string>& path,
                              const Overrides& overrides) {
  afc::SimConfig cfg = path ? afc::load_config(*path) : afc::SimConfig{};
  for (const auto& [key, value] : overrides.pairs)
    afc::apply_config_key(cfg, key, value);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive fuzzy compensation of a dead-zone actuator: batch "
               "simulation, sweeps and numeric verification"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::string out_dir = ".";
  Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "run one closed-loop experiment");
  simulate->add_option("--config", config_path, "config file (key = value lines)");
  simulate->add_option("--out", out_dir, "output directory");
  overrides.attach(simulate);

  auto* verify = app.add_subcommand("verify", "run the numeric property suite");
  verify->add_option("--config", config_path, "config file (key = value lines)");

  std::string sweep_param;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "run one experiment per parameter value");
  sweep->add_option("--config", config_path, "config file (key = value lines)");
  sweep->add_option("--param", sweep_param, "parameter to sweep")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto cfg = resolve_config(config_path, overrides);
      return afc::cmd_simulate(cfg, out_dir, std::cout);
    }
    if (verify->parsed()) {
      const auto cfg = resolve_config(config_path, overrides);
      return afc::cmd_verify(cfg, std::cout);
    }
    const auto cfg = resolve_config(config_path, overrides);
    std::vector<double> values;
    if (!afc::detail::trim(sweep_values).empty())
      values = afc::detail::parse_double_list(sweep_values, "values");
    return afc::cmd_sweep(cfg, sweep_param, values, out_dir, std::cout);
  } catch (const afc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const afc::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

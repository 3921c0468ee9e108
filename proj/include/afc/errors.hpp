#pragma once

#include <stdexcept>
#include <string>

namespace afc {

// Invalid or inconsistent configuration. Carries the offending key so the
// CLI can name it on exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Simulation left the trusted region or produced a non-finite value.
// Carries the simulation time of the offending step (exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& message)
      : std::runtime_error(message), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace afc

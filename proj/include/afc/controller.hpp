#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "afc/fuzzy.hpp"

namespace afc {

// Row n-1 of Pascal's triangle: entry i = (n-1)! / ((n-i-1)! i!).
inline std::vector<long long> binomial_coeffs(int order) {
  if (order < 1) throw std::invalid_argument("filter order must be >= 1");
  std::vector<long long> c(static_cast<std::size_t>(order));
  c[0] = 1;
  for (int i = 0; i + 1 < order; ++i) c[i + 1] = c[i] * (order - 1 - i) / (i + 1);
  return c;
}

// Combined tracking-error measure for an n-th order error vector
// [e, e', ..., e^(n-1)]:
//
//   combined_error(e) = sum_j w_j e^(j),  w_j = binom(n-1, n-1-j) * lambda^(n-1-j)
//
// so the top derivative has unit weight and combined_error = 0 defines a
// stable (Hurwitz, all poles at -lambda) manifold of the error dynamics.
// shifted_error() is the remainder of d/dt combined_error once e^(n) is
// split off: the same weights applied one derivative up.
class ErrorFilter {
 public:
  ErrorFilter(int order, double bandwidth) : order_(order), bandwidth_(bandwidth) {
    if (!std::isfinite(bandwidth) || bandwidth <= 0.0)
      throw std::invalid_argument("filter bandwidth must be finite and > 0");
    const auto binom = binomial_coeffs(order);
    weights_.resize(static_cast<std::size_t>(order));
    for (int j = 0; j < order; ++j)
      weights_[j] = static_cast<double>(binom[order - 1 - j]) *
                    std::pow(bandwidth, order - 1 - j);
  }

  int order() const { return order_; }
  double bandwidth() const { return bandwidth_; }
  const std::vector<double>& weights() const { return weights_; }

  double combined_error(std::span<const double> error) const {
    check_dimension(error);
    double out = 0.0;
    for (int j = 0; j < order_; ++j) out += weights_[j] * error[j];
    return out;
  }

  double shifted_error(std::span<const double> error) const {
    check_dimension(error);
    double out = 0.0;
    for (int j = 1; j < order_; ++j) out += weights_[j - 1] * error[j];
    return out;
  }

 private:
  void check_dimension(std::span<const double> error) const {
    if (error.size() != static_cast<std::size_t>(order_))
      throw std::invalid_argument("error vector dimension does not match filter order");
  }

  int order_;
  double bandwidth_;
  std::vector<double> weights_;
};

struct ControllerGains {
  double kappa = 10.0;          // combined-error feedback gain, > 0
  double phi = 3.0;             // adaptation rate; 0 disables adaptation
  double plant_gain = 1.0;      // input gain b, known to the controller
  double deadzone_slope = 1.0;  // dead-zone slope m, known to the controller

  double bm() const { return plant_gain * deadzone_slope; }

  void validate() const {
    if (!std::isfinite(kappa) || kappa <= 0.0)
      throw std::invalid_argument("kappa must be finite and > 0");
    if (!std::isfinite(phi) || phi < 0.0)
      throw std::invalid_argument("phi must be finite and >= 0");
    if (!std::isfinite(bm()) || bm() == 0.0)
      throw std::invalid_argument("plant_gain * deadzone_slope must be nonzero");
  }
};

// Model-inverting part of the control law:
//   (1/bm) * (-drift + ref_nth_derivative - shifted_error(error))
inline double equivalent_control(double drift, double ref_nth_derivative,
                                 std::span<const double> error,
                                 const ControllerGains& gains,
                                 const ErrorFilter& filter) {
  const double bm = gains.bm();
  if (bm == 0.0) throw std::invalid_argument("bm must be nonzero");
  return (-drift + ref_nth_derivative - filter.shifted_error(error)) / bm;
}

// Full control action: equivalent control plus error feedback plus the
// fuzzy estimate of the dead-zone residual.
inline double control_action(double equivalent, double combined_error,
                             double residual_estimate, const ControllerGains& gains) {
  if (!std::isfinite(equivalent) || !std::isfinite(combined_error) ||
      !std::isfinite(residual_estimate))
    throw std::domain_error("control inputs must be finite");
  return equivalent - gains.kappa * combined_error / gains.bm() + residual_estimate;
}

// One explicit Euler step of the gradient adaptation: each rule output moves
// against the combined error in proportion to its own basis activation. The
// update depends on rate and dt only through their product, so scaling one
// against the other leaves the trajectory unchanged.
inline void adapt_rule_outputs(std::vector<double>& rule_outputs, double combined_error,
                               std::span<const double> basis, double rate, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("adaptation dt must be > 0");
  if (rule_outputs.size() != basis.size())
    throw std::invalid_argument("rule outputs and basis must have equal length");
  if (!std::isfinite(combined_error))
    throw std::domain_error("combined error must be finite");
  const double step = rate * dt;
  for (std::size_t r = 0; r < rule_outputs.size(); ++r)
    rule_outputs[r] -= step * combined_error * basis[r];
}

// Single-threaded control-loop state machine. One update() per control
// sample: evaluates the law with the current rule outputs, then adapts them.
// Rule outputs start at zero.
class TrackingController {
 public:
  struct Options {
    // Optional symmetric clamp on each rule output, off by default.
    std::optional<double> rule_output_limit{};
    // Test hook for the verification suite: flips the adaptation direction.
    bool negate_adaptation = false;
  };

  struct Command {
    double u = 0.0;                  // actuator command
    double equivalent = 0.0;         // model-inverting component
    double combined_error = 0.0;     // filtered tracking error
    double residual_estimate = 0.0;  // fuzzy dead-zone residual estimate
  };

  TrackingController(ErrorFilter filter, FuzzyPartition partition,
                     ControllerGains gains, double sample_period)
      : TrackingController(std::move(filter), std::move(partition), gains,
                           sample_period, Options{}) {}

  TrackingController(ErrorFilter filter, FuzzyPartition partition,
                     ControllerGains gains, double sample_period, Options options)
      : filter_(std::move(filter)),
        partition_(std::move(partition)),
        gains_(gains),
        sample_period_(sample_period),
        options_(options),
        rule_outputs_(partition_.size(), 0.0) {
    gains_.validate();
    if (!std::isfinite(sample_period) || sample_period <= 0.0)
      throw std::invalid_argument("controller sample period must be finite and > 0");
    if (options_.rule_output_limit && !(*options_.rule_output_limit > 0.0))
      throw std::invalid_argument("rule output limit must be > 0");
  }

  Command update(std::span<const double> tracking_error, double drift,
                 double ref_nth_derivative) {
    const double eps = filter_.combined_error(tracking_error);
    const double uhat =
        equivalent_control(drift, ref_nth_derivative, tracking_error, gains_, filter_);
    partition_.basis(uhat, basis_);
    const double dhat = infer(rule_outputs_, basis_);
    const double u = control_action(uhat, eps, dhat, gains_);

    const double rate = options_.negate_adaptation ? -gains_.phi : gains_.phi;
    adapt_rule_outputs(rule_outputs_, eps, basis_, rate, sample_period_);
    if (options_.rule_output_limit) {
      const double lim = *options_.rule_output_limit;
      for (double& d : rule_outputs_) d = std::clamp(d, -lim, lim);
    }

    last_ = Command{u, uhat, eps, dhat};
    return last_;
  }

  const std::vector<double>& rule_outputs() const { return rule_outputs_; }
  const Command& last() const { return last_; }
  const ErrorFilter& filter() const { return filter_; }
  const FuzzyPartition& partition() const { return partition_; }
  const ControllerGains& gains() const { return gains_; }
  double sample_period() const { return sample_period_; }

 private:
  ErrorFilter filter_;
  FuzzyPartition partition_;
  ControllerGains gains_;
  double sample_period_;
  Options options_;
  std::vector<double> rule_outputs_;
  std::vector<double> basis_;
  Command last_{};
};

}  // namespace afc

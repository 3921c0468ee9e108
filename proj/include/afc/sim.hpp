#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afc/controller.hpp"
#include "afc/deadzone.hpp"
#include "afc/errors.hpp"
#include "afc/fuzzy.hpp"

namespace afc {

// n-th order plant in companion form: x^(n) = drift(x, t) + input_gain(x, t) * v
// with state [x, x', ..., x^(n-1)].
struct PlantModel {
  int order = 2;
  std::function<double(std::span<const double>, double)> drift;
  std::function<double(std::span<const double>, double)> input_gain;
};

struct VanDerPolParams {
  double mu = 1.0;    // damping parameter
  double gain = 1.0;  // input gain
};

// x'' - mu (1 - x^2) x' + x = gain * v
inline std::array<double, 2> van_der_pol_rhs(const std::array<double, 2>& state,
                                             double input, double /*t*/,
                                             const VanDerPolParams& p) {
  return {state[1],
          p.mu * (1.0 - state[0] * state[0]) * state[1] - state[0] + p.gain * input};
}

inline PlantModel make_van_der_pol(const VanDerPolParams& p) {
  PlantModel plant;
  plant.order = 2;
  plant.drift = [p](std::span<const double> x, double) {
    return p.mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
  };
  plant.input_gain = [p](std::span<const double>, double) { return p.gain; };
  return plant;
}

// Classical four-stage Runge-Kutta step. rhs(state, t) returns the state
// derivative; any held input must be bound into rhs by the caller.
template <class Rhs>
std::vector<double> rk4_step(Rhs&& rhs, const std::vector<double>& state, double t,
                             double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4 step size must be > 0");
  const std::size_t n = state.size();
  auto checked = [&](std::vector<double> k) {
    for (double v : k)
      if (!std::isfinite(v))
        throw DivergenceError(t, "non-finite derivative in rk4 stage at t = " +
                                     std::to_string(t));
    return k;
  };

  const std::vector<double> k1 = checked(rhs(state, t));
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
  const std::vector<double> k2 = checked(rhs(tmp, t + 0.5 * h));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
  const std::vector<double> k3 = checked(rhs(tmp, t + 0.5 * h));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
  const std::vector<double> k4 = checked(rhs(tmp, t + h));

  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i)
    next[i] = state[i] + (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
  return next;
}

// Reference trajectory x_d(t) = sin t with all derivatives analytic.
class SineReference {
 public:
  explicit SineReference(int order) : order_(order) {
    if (order < 1) throw std::invalid_argument("reference order must be >= 1");
  }

  // derivatives[k] = d^k/dt^k sin t for k = 0..order-1; nth = the order-th.
  void sample(double t, std::span<double> derivatives, double& nth) const {
    for (int k = 0; k < order_; ++k) derivatives[k] = derivative(k, t);
    nth = derivative(order_, t);
  }

 private:
  static double derivative(int k, double t) {
    switch (k % 4) {
      case 0: return std::sin(t);
      case 1: return std::cos(t);
      case 2: return -std::sin(t);
      default: return -std::cos(t);
    }
  }

  int order_;
};

// Full experiment configuration. Field names match the config-file keys.
struct SimConfig {
  double t_end = 40.0;
  double plant_rate = 1000.0;   // Hz
  double control_rate = 500.0;  // Hz
  std::vector<double> x0{0.0, 0.0};
  double mu = 1.0;
  double b = 1.0;
  double m = 1.0;
  double delta_l = -0.4;
  double delta_r = 0.3;
  double lambda = 0.6;
  double kappa = 10.0;
  double phi = 3.0;
  std::vector<double> centers{-0.5, -0.1, -0.05, 0.0, 0.05, 0.1, 0.5};
  bool log_dhat = false;
  bool seedless = true;  // reserved; no randomness exists in a run

  long long control_samples() const { return std::llround(t_end * control_rate); }

  int substeps() const {
    const double ratio = plant_rate / control_rate;
    return static_cast<int>(std::llround(ratio));
  }

  void validate() const {
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(t_end) || t_end < 0.0) throw ConfigError("t_end", "must be finite and >= 0");
    if (bad(plant_rate) || plant_rate <= 0.0)
      throw ConfigError("plant_rate", "must be finite and > 0");
    if (bad(control_rate) || control_rate <= 0.0)
      throw ConfigError("control_rate", "must be finite and > 0");
    const double ratio = plant_rate / control_rate;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9 || std::llround(ratio) < 1)
      throw ConfigError("plant_rate", "must be an integer multiple of control_rate");
    if (x0.size() != 2) throw ConfigError("x0", "must have exactly 2 components");
    for (double v : x0)
      if (bad(v)) throw ConfigError("x0", "components must be finite");
    if (bad(mu)) throw ConfigError("mu", "must be finite");
    if (bad(b) || b == 0.0) throw ConfigError("b", "must be finite and nonzero");
    if (bad(m) || m <= 0.0) throw ConfigError("m", "must be finite and > 0");
    if (bad(delta_l) || delta_l >= 0.0) throw ConfigError("delta_l", "must be < 0");
    if (bad(delta_r) || delta_r <= 0.0) throw ConfigError("delta_r", "must be > 0");
    if (bad(lambda) || lambda <= 0.0) throw ConfigError("lambda", "must be finite and > 0");
    if (bad(kappa) || kappa <= 0.0) throw ConfigError("kappa", "must be finite and > 0");
    if (bad(phi) || phi < 0.0) throw ConfigError("phi", "must be finite and >= 0");
    if (centers.size() < 2) throw ConfigError("centers", "needs at least 2 values");
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (bad(centers[i])) throw ConfigError("centers", "values must be finite");
      if (i > 0 && !(centers[i - 1] < centers[i]))
        throw ConfigError("centers", "values must be strictly increasing");
    }
  }
};

// One row of the closed-loop log, emitted per control sample.
struct SimRecord {
  double t = 0.0;
  std::vector<double> state;      // [x, xdot] at the sample instant
  std::vector<double> reference;  // [xd, xddot]
  std::vector<double> error;      // state - reference
  double u = 0.0;                 // controller output
  double upsilon = 0.0;           // actuator output after the dead-zone
  double uhat = 0.0;              // equivalent control
  double epsilon = 0.0;           // combined tracking error
  double dhat = 0.0;              // fuzzy residual estimate used in u
  double dtrue = 0.0;             // true dead-zone residual of u
  std::vector<double> rule_outputs;  // adapted-parameter snapshot (pre-update),
                                     // filled only when log_dhat is set
};

// Test instrumentation for the verification suite; default-constructed
// overrides reproduce the plain run exactly.
struct RunOverrides {
  TrackingController::Options controller{};
  std::optional<FuzzyPartition> partition{};
};

// Multirate closed loop: the controller runs at control_rate and its output
// is held (ZOH) while the plant integrates at plant_rate. The dead-zone is
// static, so the actuator value is computed once per control period from the
// held u. Aborts with the offending time once any state component leaves
// [-1e6, 1e6].
inline std::vector<SimRecord> run_closed_loop(const SimConfig& cfg,
                                              const RunOverrides& overrides) {
  cfg.validate();

  const DeadZone dz(cfg.m, cfg.delta_l, cfg.delta_r);
  const PlantModel plant = make_van_der_pol({cfg.mu, cfg.b});
  FuzzyPartition partition = overrides.partition
                                 ? *overrides.partition
                                 : FuzzyPartition::from_centers(cfg.centers);
  const ErrorFilter filter(plant.order, cfg.lambda);
  const ControllerGains gains{cfg.kappa, cfg.phi, cfg.b, cfg.m};

  const double control_dt = 1.0 / cfg.control_rate;
  const double plant_dt = 1.0 / cfg.plant_rate;
  const int substeps = cfg.substeps();
  const long long samples = cfg.control_samples();

  TrackingController controller(filter, std::move(partition), gains, control_dt,
                                overrides.controller);
  const SineReference reference(plant.order);

  std::vector<double> x = cfg.x0;
  std::vector<double> xd(static_cast<std::size_t>(plant.order));
  std::vector<double> err(static_cast<std::size_t>(plant.order));
  std::vector<SimRecord> records;
  records.reserve(static_cast<std::size_t>(samples));

  for (long long k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * control_dt;

    double ref_nth = 0.0;
    reference.sample(t, xd, ref_nth);
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = x[i] - xd[i];

    SimRecord rec;
    rec.t = t;
    rec.state = x;
    rec.reference = xd;
    rec.error = err;
    if (cfg.log_dhat) rec.rule_outputs = controller.rule_outputs();

    const auto cmd = controller.update(err, plant.drift(x, t), ref_nth);
    rec.u = cmd.u;
    rec.uhat = cmd.equivalent;
    rec.epsilon = cmd.combined_error;
    rec.dhat = cmd.residual_estimate;
    rec.upsilon = dz.apply(cmd.u);
    rec.dtrue = dz.residual(cmd.u);

    const double held_input = rec.upsilon;
    records.push_back(std::move(rec));

    auto rhs = [&](const std::vector<double>& st, double ts) {
      std::vector<double> dx(st.size());
      for (std::size_t i = 0; i + 1 < st.size(); ++i) dx[i] = st[i + 1];
      dx.back() = plant.drift(st, ts) + plant.input_gain(st, ts) * held_input;
      return dx;
    };
    for (int s = 0; s < substeps; ++s) {
      const double ts = t + static_cast<double>(s) * plant_dt;
      x = rk4_step(rhs, x, ts, plant_dt);
      for (double v : x)
        if (!std::isfinite(v) || std::abs(v) > 1e6)
          throw DivergenceError(ts + plant_dt,
                                "state diverged at t = " + std::to_string(ts + plant_dt));
    }
  }
  return records;
}

inline std::vector<SimRecord> run_closed_loop(const SimConfig& cfg) {
  return run_closed_loop(cfg, RunOverrides{});
}

}  // namespace afc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "afc/controller.hpp"
#include "afc/deadzone.hpp"
#include "afc/fuzzy.hpp"
#include "afc/metrics.hpp"
#include "afc/sim.hpp"

namespace afc {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline bool within_one_ulp(double a, double b) {
  if (a == b) return true;
  return std::nextafter(a, b) == b;
}

namespace detail {

// Gaussian elimination with partial pivoting; fine for the rule-count-sized
// systems this module solves.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0)
      throw std::runtime_error("singular system in least-squares fit");
    std::swap(a[col], a[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace detail

// Optimal rule outputs in the least-squares sense: the projection of the
// true dead-zone residual onto the partition's basis functions over a dense
// grid. This is the reference point for the Lyapunov surrogate; its grid
// error bounds what any adapted parameter vector can achieve.
struct ResidualFit {
  std::vector<double> rule_outputs;
  double grid_max_error = 0.0;
  double grid_rms_error = 0.0;
};

inline ResidualFit fit_residual_outputs(const DeadZone& dz, const FuzzyPartition& part,
                                        double u_lo, double u_hi, int grid_points) {
  if (grid_points < 2 || !(u_lo < u_hi))
    throw std::invalid_argument("fit grid needs at least 2 points and u_lo < u_hi");
  const std::size_t n = part.size();
  std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  std::vector<double> psi;
  for (int g = 0; g < grid_points; ++g) {
    const double u = u_lo + (u_hi - u_lo) * g / (grid_points - 1);
    part.basis(u, psi);
    const double target = dz.residual(u);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] += psi[i] * target;
      for (std::size_t j = 0; j < n; ++j) gram[i][j] += psi[i] * psi[j];
    }
  }
  ResidualFit fit;
  fit.rule_outputs = detail::solve_dense(std::move(gram), std::move(rhs));
  double sq = 0.0;
  for (int g = 0; g < grid_points; ++g) {
    const double u = u_lo + (u_hi - u_lo) * g / (grid_points - 1);
    part.basis(u, psi);
    const double err = infer(fit.rule_outputs, psi) - dz.residual(u);
    fit.grid_max_error = std::max(fit.grid_max_error, std::abs(err));
    sq += err * err;
  }
  fit.grid_rms_error = std::sqrt(sq / grid_points);
  return fit;
}

// Lyapunov surrogate along a logged run: V_k = eps_k^2/2 + bm/(2 phi) |Dhat_k - Dstar|^2
// evaluated with the pre-update parameter snapshots, plus the per-sample
// ingredients of the growth budget. The budget for a window is
//
//   bm * sum |e_k| |eps_k| dt  +  (bm phi / 2) * sum eps_k^2 |psi_k|^2 dt^2
//
// where e_k is the fit error of Dstar at the visited point: the first term
// bounds the fit-error power bm*e*eps in dV/dt, the second is the exact
// second-order term of the explicit Euler parameter update.
struct LyapunovSeries {
  std::vector<double> v;               // V at each control sample
  std::vector<double> budget_step;     // per-sample growth allowance
  double power_balance_integral = 0.0; // kappa * integral of eps^2 dt
};

inline LyapunovSeries lyapunov_series(std::span<const SimRecord> records,
                                      const std::vector<double>& optimal_outputs,
                                      const FuzzyPartition& partition,
                                      const ControllerGains& gains, double control_dt) {
  if (gains.phi <= 0.0)
    throw std::invalid_argument("lyapunov surrogate requires phi > 0");
  const double bm = gains.bm();
  LyapunovSeries out;
  out.v.reserve(records.size());
  out.budget_step.reserve(records.size());
  std::vector<double> psi;
  for (const auto& rec : records) {
    if (rec.rule_outputs.size() != optimal_outputs.size())
      throw std::invalid_argument("records must carry rule-output snapshots");
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < optimal_outputs.size(); ++i) {
      const double d = rec.rule_outputs[i] - optimal_outputs[i];
      dist_sq += d * d;
    }
    out.v.push_back(0.5 * rec.epsilon * rec.epsilon + bm / (2.0 * gains.phi) * dist_sq);

    partition.basis(rec.uhat, psi);
    const double fit_err = infer(optimal_outputs, psi) - rec.dtrue;
    double psi_sq = 0.0;
    for (double p : psi) psi_sq += p * p;
    out.budget_step.push_back(
        bm * std::abs(fit_err) * std::abs(rec.epsilon) * control_dt +
        0.5 * bm * gains.phi * rec.epsilon * rec.epsilon * psi_sq * control_dt * control_dt);
    out.power_balance_integral += gains.kappa * rec.epsilon * rec.epsilon * control_dt;
  }
  return out;
}

namespace detail {

template <class Fn>
PropertyResult run_guarded(const std::string& name, Fn&& fn) {
  PropertyResult res;
  res.name = name;
  try {
    fn(res);
  } catch (const std::exception& e) {
    res.passed = false;
    res.detail = std::string("exception: ") + e.what();
  }
  return res;
}

}  // namespace detail

// Executes the numeric invariant suite of every module against one
// configuration. Overrides exist so tests can confirm the suite catches
// deliberately broken setups; a default-constructed RunOverrides checks the
// artifact as shipped.
inline std::vector<PropertyResult> run_property_suite(const SimConfig& cfg,
                                                      const RunOverrides& overrides) {
  cfg.validate();
  std::vector<PropertyResult> results;
  const FuzzyPartition partition = overrides.partition
                                       ? *overrides.partition
                                       : FuzzyPartition::from_centers(cfg.centers);

  results.push_back(detail::run_guarded("deadzone_decomposition", [&](PropertyResult& r) {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u_dist(-100.0, 100.0);
    std::uniform_real_distribution<double> slope_dist(0.05, 5.0);
    std::uniform_real_distribution<double> left_dist(-5.0, -1e-3);
    std::uniform_real_distribution<double> right_dist(1e-3, 5.0);
    for (int set = 0; set < 100; ++set) {
      const DeadZone dz(slope_dist(rng), left_dist(rng), right_dist(rng));
      for (int i = 0; i < 10000; ++i) {
        const double u = u_dist(rng);
        const double direct = dz.apply(u);
        const double decomposed = dz.slope() * (u - dz.residual(u));
        if (!within_one_ulp(direct, decomposed)) {
          r.detail = "identity broken at u = " + detail::fmt(u);
          return;
        }
      }
    }
    r.passed = true;
    r.detail = "10^6 inputs, 100 parameter sets, within 1 ulp";
  }));

  results.push_back(detail::run_guarded("deadzone_residual_bound", [&](PropertyResult& r) {
    std::mt19937 rng(54321);
    std::uniform_real_distribution<double> u_dist(-100.0, 100.0);
    const DeadZone dz(cfg.m, cfg.delta_l, cfg.delta_r);
    const double bound = dz.residual_bound();
    for (int i = 0; i < 1000000; ++i) {
      const double u = u_dist(rng);
      if (std::abs(dz.residual(u)) > bound) {
        r.detail = "bound violated at u = " + detail::fmt(u);
        return;
      }
    }
    r.passed = true;
    r.detail = "|residual| <= " + detail::fmt(bound) + " on 10^6 inputs";
  }));

  results.push_back(detail::run_guarded("deadzone_monotone_continuous", [&](PropertyResult& r) {
    const DeadZone dz(cfg.m, cfg.delta_l, cfg.delta_r);
    double prev = dz.apply(-50.0);
    for (int i = 1; i <= 100000; ++i) {
      const double u = -50.0 + 100.0 * i / 100000.0;
      const double cur = dz.apply(u);
      if (cur < prev) {
        r.detail = "apply decreased at u = " + detail::fmt(u);
        return;
      }
      prev = cur;
    }
    const double step_out = 1.01 * dz.slope() * 1e-12;
    for (const double edge : {dz.delta_left(), dz.delta_right()}) {
      if (dz.apply(edge) != 0.0 || std::abs(dz.apply(edge - 1e-12)) > step_out ||
          std::abs(dz.apply(edge + 1e-12)) > step_out) {
        r.detail = "discontinuity at band edge " + detail::fmt(edge);
        return;
      }
    }
    r.passed = true;
    r.detail = "non-decreasing, zero on the band, continuous at the edges";
  }));

  results.push_back(detail::run_guarded("partition_of_unity", [&](PropertyResult& r) {
    std::vector<double> psi;
    double worst = 0.0;
    const int samples = 100000;
    for (int i = 0; i < samples; ++i) {
      const double u = -2.0 + 4.0 * i / (samples - 1);
      partition.basis(u, psi);
      double sum = 0.0;
      for (double p : psi) sum += p;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    r.passed = worst <= 1e-12;
    r.detail = "max |sum(psi) - 1| = " + detail::fmt(worst);
  }));

  results.push_back(detail::run_guarded("fuzzy_center_selection", [&](PropertyResult& r) {
    std::mt19937 rng(2468);
    std::uniform_real_distribution<double> d_dist(-1.0, 1.0);
    std::vector<double> outputs(partition.size());
    for (double& d : outputs) d = d_dist(rng);
    const double lo = *std::min_element(outputs.begin(), outputs.end());
    const double hi = *std::max_element(outputs.begin(), outputs.end());
    for (std::size_t rix = 0; rix < partition.size(); ++rix) {
      const auto psi = partition.basis(partition.centers()[rix]);
      if (infer(outputs, psi) != outputs[rix]) {
        r.detail = "interpolation not exact at center " + std::to_string(rix + 1);
        return;
      }
    }
    for (int i = 0; i < 20000; ++i) {
      const double u = -2.0 + 4.0 * i / 19999.0;
      const auto psi = partition.basis(u);
      const double d = infer(outputs, psi);
      if (d < lo - 1e-12 || d > hi + 1e-12) {
        r.detail = "output left the convex hull at u = " + detail::fmt(u);
        return;
      }
      int firing = 0;
      for (double p : psi)
        if (p > 0.0) ++firing;
      if (firing > 2) {
        r.detail = "more than two rules fired at u = " + detail::fmt(u);
        return;
      }
    }
    r.passed = true;
    r.detail = "exact at centers, convex range, at most two rules fire";
  }));

  results.push_back(detail::run_guarded("combined_error_linearity", [&](PropertyResult& r) {
    std::mt19937 rng(1357);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (const int order : {2, 4}) {
      const ErrorFilter filter(order, cfg.lambda);
      for (int i = 0; i < 5000; ++i) {
        std::vector<double> e1(order), e2(order), mix(order);
        const double alpha = dist(rng), beta = dist(rng);
        for (int j = 0; j < order; ++j) {
          e1[j] = dist(rng);
          e2[j] = dist(rng);
          mix[j] = alpha * e1[j] + beta * e2[j];
        }
        const double direct = filter.combined_error(mix);
        const double sum =
            alpha * filter.combined_error(e1) + beta * filter.combined_error(e2);
        if (std::abs(direct - sum) > 1e-12) {
          r.detail = "linearity off by " + detail::fmt(direct - sum);
          return;
        }
      }
    }
    r.passed = true;
    r.detail = "orders 2 and 4, 5000 random pairs each, within 1e-12";
  }));

  results.push_back(detail::run_guarded("adaptation_product_invariance", [&](PropertyResult& r) {
    std::mt19937 rng(8642);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::size_t n = partition.size();
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), psi;
    for (int step = 0; step < 500; ++step) {
      const double u = dist(rng);
      const double eps = dist(rng);
      partition.basis(u, psi);
      adapt_rule_outputs(a, eps, psi, cfg.phi, 0.002);
      adapt_rule_outputs(b, eps, psi, cfg.phi * 4.0, 0.0005);
      adapt_rule_outputs(c, eps, psi, cfg.phi * 0.5, 0.004);
    }
    if (a != b || a != c) {
      r.detail = "trajectories differ under rate/dt rescaling";
      return;
    }
    r.passed = true;
    r.detail = "bit-identical under power-of-two rate/dt rescaling";
  }));

  results.push_back(detail::run_guarded("rk4_fourth_order", [&](PropertyResult& r) {
    auto rhs = [](const std::vector<double>& s, double) {
      return std::vector<double>{s[1], -s[0]};
    };
    auto global_error = [&](double h) {
      std::vector<double> x{1.0, 0.0};
      const long steps = std::lround(2.0 * std::numbers::pi / h);
      double worst = 0.0;
      for (long k = 0; k < steps; ++k) {
        x = rk4_step(rhs, x, k * h, h);
        const double t = (k + 1) * h;
        worst = std::max(worst, std::hypot(x[0] - std::cos(t), x[1] + std::sin(t)));
      }
      return worst;
    };
    const double coarse = global_error(2e-3);
    const double fine = global_error(1e-3);
    const double ratio = coarse / fine;
    r.passed = ratio >= 12.0 && ratio <= 20.0;
    r.detail = "error(2e-3)/error(1e-3) = " + detail::fmt(ratio);
  }));

  results.push_back(detail::run_guarded("vdp_limit_cycle", [&](PropertyResult& r) {
    const VanDerPolParams p{cfg.mu, cfg.b};
    auto rhs = [&](const std::vector<double>& s, double t) {
      const auto d = van_der_pol_rhs({s[0], s[1]}, 0.0, t, p);
      return std::vector<double>{d[0], d[1]};
    };
    const double h = 1e-3;
    std::vector<double> x{2.0, 0.0};
    double amp_prev = 0.0, amp_last = 0.0;
    for (long k = 0; k < 40000; ++k) {
      x = rk4_step(rhs, x, k * h, h);
      const double t = (k + 1) * h;
      if (t > 20.0 && t <= 30.0) amp_prev = std::max(amp_prev, std::abs(x[0]));
      if (t > 30.0) amp_last = std::max(amp_last, std::abs(x[0]));
    }
    const double rel = std::abs(amp_last - amp_prev) / amp_last;
    r.passed = rel < 0.01;
    r.detail = "window amplitudes " + detail::fmt(amp_prev) + " / " +
               detail::fmt(amp_last) + ", relative change " + detail::fmt(rel);
  }));

  // The remaining properties share one logged closed-loop run.
  SimConfig run_cfg = cfg;
  run_cfg.log_dhat = true;
  std::vector<SimRecord> records;
  std::string run_failure;
  try {
    records = run_closed_loop(run_cfg, overrides);
  } catch (const std::exception& e) {
    run_failure = e.what();
  }

  results.push_back(detail::run_guarded("closed_loop_actuator_identity", [&](PropertyResult& r) {
    if (!run_failure.empty()) {
      r.detail = "closed-loop run failed: " + run_failure;
      return;
    }
    for (const auto& rec : records) {
      if (!within_one_ulp(rec.upsilon, cfg.m * (rec.u - rec.dtrue))) {
        r.detail = "log identity broken at t = " + detail::fmt(rec.t);
        return;
      }
    }
    r.passed = true;
    r.detail = "upsilon == m (u - d) at all " + std::to_string(records.size()) + " records";
  }));

  results.push_back(detail::run_guarded("lyapunov_surrogate", [&](PropertyResult& r) {
    if (!run_failure.empty()) {
      r.detail = "closed-loop run failed: " + run_failure;
      return;
    }
    if (cfg.phi <= 0.0) {
      r.detail = "requires phi > 0";
      return;
    }
    const DeadZone dz(cfg.m, cfg.delta_l, cfg.delta_r);
    const auto fit = fit_residual_outputs(dz, partition, -1.5, 1.5, 3001);
    const ControllerGains gains{cfg.kappa, cfg.phi, cfg.b, cfg.m};
    const double dt = 1.0 / cfg.control_rate;
    const auto series = lyapunov_series(records, fit.rule_outputs, partition, gains, dt);
    if (series.v.size() < 2) {
      r.detail = "run too short for the surrogate";
      return;
    }
    if (!(series.v.back() < series.v.front())) {
      r.detail = "V grew over the run: V(0) = " + detail::fmt(series.v.front()) +
                 ", V(end) = " + detail::fmt(series.v.back());
      return;
    }
    const auto window = static_cast<std::size_t>(std::llround(cfg.control_rate));
    double worst_excess = -1e300;
    double worst_t = 0.0;
    if (series.v.size() > window) {
      std::vector<double> budget_prefix(series.v.size() + 1, 0.0);
      for (std::size_t i = 0; i < series.budget_step.size(); ++i)
        budget_prefix[i + 1] = budget_prefix[i] + series.budget_step[i];
      for (std::size_t k = 0; k + window < series.v.size(); ++k) {
        const double growth = series.v[k + window] - series.v[k];
        const double budget = budget_prefix[k + window] - budget_prefix[k] + 1e-12;
        if (growth - budget > worst_excess) {
          worst_excess = growth - budget;
          worst_t = records[k].t;
        }
      }
      if (worst_excess > 0.0) {
        r.detail = "V grew past the fit-error budget by " + detail::fmt(worst_excess) +
                   " in the window starting at t = " + detail::fmt(worst_t);
        return;
      }
    }
    r.passed = true;
    r.detail = "V(0) = " + detail::fmt(series.v.front()) +
               ", V(end) = " + detail::fmt(series.v.back()) +
               ", worst window margin = " + detail::fmt(-worst_excess) +
               "; power balance: kappa*int(eps^2) = " +
               detail::fmt(series.power_balance_integral) +
               " vs V(0)-V(end) = " + detail::fmt(series.v.front() - series.v.back());
  }));

  results.push_back(detail::run_guarded("epsilon_convergence", [&](PropertyResult& r) {
    if (!run_failure.empty()) {
      r.detail = "closed-loop run failed: " + run_failure;
      return;
    }
    const double t_end = records.empty() ? 0.0 : records.back().t;
    const double early = max_abs_epsilon(records, {0.0, t_end / 4.0});
    const double late = max_abs_epsilon(records, {3.0 * t_end / 4.0, t_end});
    r.passed = !records.empty() && late < 0.1 * early;
    r.detail = "max|eps| first quarter = " + detail::fmt(early) +
               ", last quarter = " + detail::fmt(late);
  }));

  return results;
}

inline std::vector<PropertyResult> run_property_suite(const SimConfig& cfg) {
  return run_property_suite(cfg, RunOverrides{});
}

}  // namespace afc

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "afc/sim.hpp"

namespace afc {

// Closed time window [t0, t1] over a record stream.
struct Window {
  double t0 = 0.0;
  double t1 = 0.0;
};

namespace detail {
template <class Fn>
void for_each_in_window(std::span<const SimRecord> records, Window w, Fn&& fn) {
  for (const auto& r : records)
    if (r.t >= w.t0 && r.t <= w.t1) fn(r);
}
}  // namespace detail

inline double max_abs_tracking_error(std::span<const SimRecord> records, Window w) {
  double out = 0.0;
  detail::for_each_in_window(records, w,
                             [&](const SimRecord& r) { out = std::max(out, std::abs(r.error[0])); });
  return out;
}

inline double rms_tracking_error(std::span<const SimRecord> records, Window w) {
  double sum = 0.0;
  std::size_t n = 0;
  detail::for_each_in_window(records, w, [&](const SimRecord& r) {
    sum += r.error[0] * r.error[0];
    ++n;
  });
  return n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
}

inline double max_abs_epsilon(std::span<const SimRecord> records, Window w) {
  double out = 0.0;
  detail::for_each_in_window(records, w,
                             [&](const SimRecord& r) { out = std::max(out, std::abs(r.epsilon)); });
  return out;
}

inline double max_abs_control(std::span<const SimRecord> records, Window w) {
  double out = 0.0;
  detail::for_each_in_window(records, w,
                             [&](const SimRecord& r) { out = std::max(out, std::abs(r.u)); });
  return out;
}

// Rectangle-rule integral of |epsilon| dt at the control rate.
inline double integral_abs_epsilon(std::span<const SimRecord> records, Window w,
                                   double dt) {
  double sum = 0.0;
  detail::for_each_in_window(records, w,
                             [&](const SimRecord& r) { sum += std::abs(r.epsilon); });
  return sum * dt;
}

// Convergence check on the combined error: its peak over the last quarter of
// the run must fall below 10% of its peak over the first quarter.
inline bool epsilon_converged(std::span<const SimRecord> records) {
  if (records.empty()) return false;
  const double t_end = records.back().t;
  const double early = max_abs_epsilon(records, {0.0, t_end / 4.0});
  const double late = max_abs_epsilon(records, {3.0 * t_end / 4.0, t_end});
  return late < 0.1 * early;
}

}  // namespace afc

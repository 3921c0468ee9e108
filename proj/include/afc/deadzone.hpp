#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace afc {

// Non-symmetric dead-zone nonlinearity: zero output inside the band
// [delta_left, delta_right], linear with a common positive slope outside.
// residual(u) is the clamp of u to the band, so that
//
//   apply(u) == slope * (u - residual(u))
//
// holds bit-exactly for every finite u. Parameters are validated once at
// construction; evaluation is branch-only and thread-safe.
class DeadZone {
 public:
  DeadZone(double slope, double delta_left, double delta_right)
      : slope_(slope), delta_left_(delta_left), delta_right_(delta_right) {
    if (!std::isfinite(slope) || slope <= 0.0)
      throw std::invalid_argument("dead-zone slope must be finite and > 0");
    if (!std::isfinite(delta_left) || !std::isfinite(delta_right) ||
        !(delta_left < 0.0 && 0.0 < delta_right))
      throw std::invalid_argument(
          "dead-zone band edges must satisfy delta_left < 0 < delta_right");
  }

  // Actuator output for controller output u. Boundary points belong to the
  // outer branches; both choices give zero there.
  double apply(double u) const {
    check_finite(u);
    if (u <= delta_left_) return slope_ * (u - delta_left_);
    if (u >= delta_right_) return slope_ * (u - delta_right_);
    return 0.0;
  }

  // The part of u swallowed by the band: clamp of u to [delta_left, delta_right].
  double residual(double u) const {
    check_finite(u);
    if (u <= delta_left_) return delta_left_;
    if (u >= delta_right_) return delta_right_;
    return u;
  }

  // Tight bound on |residual(u)| over all u.
  double residual_bound() const { return std::max(-delta_left_, delta_right_); }

  double slope() const { return slope_; }
  double delta_left() const { return delta_left_; }
  double delta_right() const { return delta_right_; }

 private:
  static void check_finite(double u) {
    if (!std::isfinite(u)) throw std::domain_error("dead-zone input must be finite");
  }

  double slope_;
  double delta_left_;
  double delta_right_;
};

}  // namespace afc

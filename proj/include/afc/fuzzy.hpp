#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace afc {

// Triangular membership grade with corner abscissae a < b < c:
//   max{ min((u-a)/(b-a), (c-u)/(c-b)), 0 }
inline double tri_membership(double u, double a, double b, double c) {
  if (!(a < b && b < c))
    throw std::invalid_argument("triangle corners must satisfy a < b < c");
  return std::max(std::min((u - a) / (b - a), (c - u) / (c - b)), 0.0);
}

// Trapezoidal membership grade with corner abscissae a < b <= c < d:
//   max{ min((u-a)/(b-a), 1, (d-u)/(d-c)), 0 }
inline double trap_membership(double u, double a, double b, double c, double d) {
  if (!(a < b && b <= c && c < d))
    throw std::invalid_argument("trapezoid corners must satisfy a < b <= c < d");
  return std::max(std::min({(u - a) / (b - a), 1.0, (d - u) / (d - c)}), 0.0);
}

// One input membership function. Shoulder variants are one-sided ramps whose
// plateau extends to infinity, so a partition built from them covers all of
// the real line.
class MembershipFunction {
 public:
  static MembershipFunction triangle(double a, double b, double c) {
    if (!(a < b && b < c))
      throw std::invalid_argument("triangle corners must satisfy a < b < c");
    return MembershipFunction(Shape::Triangle, a, b, c, 0.0);
  }

  static MembershipFunction trapezoid(double a, double b, double c, double d) {
    if (!(a < b && b <= c && c < d))
      throw std::invalid_argument("trapezoid corners must satisfy a < b <= c < d");
    return MembershipFunction(Shape::Trapezoid, a, b, c, d);
  }

  // Grade 1 for u <= plateau_end, ramping to 0 at foot.
  static MembershipFunction left_shoulder(double plateau_end, double foot) {
    if (!(plateau_end < foot))
      throw std::invalid_argument("left shoulder requires plateau_end < foot");
    return MembershipFunction(Shape::LeftShoulder, 0.0, plateau_end, foot, 0.0);
  }

  // Grade 0 for u <= foot, ramping to 1 at plateau_start and beyond.
  static MembershipFunction right_shoulder(double foot, double plateau_start) {
    if (!(foot < plateau_start))
      throw std::invalid_argument("right shoulder requires foot < plateau_start");
    return MembershipFunction(Shape::RightShoulder, foot, plateau_start, 0.0, 0.0);
  }

  double grade(double u) const {
    switch (shape_) {
      case Shape::Triangle:
        return std::max(std::min((u - a_) / (b_ - a_), (c_ - u) / (c_ - b_)), 0.0);
      case Shape::Trapezoid:
        return std::max(std::min({(u - a_) / (b_ - a_), 1.0, (d_ - u) / (d_ - c_)}),
                        0.0);
      case Shape::LeftShoulder:
        return std::max(std::min(1.0, (c_ - u) / (c_ - b_)), 0.0);
      case Shape::RightShoulder:
        return std::max(std::min((u - a_) / (b_ - a_), 1.0), 0.0);
    }
    return 0.0;
  }

 private:
  enum class Shape { Triangle, Trapezoid, LeftShoulder, RightShoulder };

  MembershipFunction(Shape shape, double a, double b, double c, double d)
      : shape_(shape), a_(a), b_(b), c_(c), d_(d) {}

  Shape shape_;
  double a_, b_, c_, d_;
};

// Ordered family of membership functions over the equivalent-control axis,
// one per rule. from_centers() builds the standard neighbor-foot layout:
// interior members are triangles peaking at their center with feet at the
// two neighboring centers; the outermost members are shoulders saturating
// at 1 beyond the first/last center. That layout fires at most two rules at
// any input and sums to 1 everywhere.
class FuzzyPartition {
 public:
  FuzzyPartition(std::vector<MembershipFunction> members, std::vector<double> centers)
      : members_(std::move(members)), centers_(std::move(centers)) {
    if (members_.size() != centers_.size())
      throw std::invalid_argument("partition members and centers must have equal length");
    validate_centers(centers_);
  }

  static FuzzyPartition from_centers(const std::vector<double>& centers) {
    validate_centers(centers);
    const std::size_t n = centers.size();
    std::vector<MembershipFunction> members;
    members.reserve(n);
    members.push_back(MembershipFunction::left_shoulder(centers[0], centers[1]));
    for (std::size_t i = 1; i + 1 < n; ++i)
      members.push_back(
          MembershipFunction::triangle(centers[i - 1], centers[i], centers[i + 1]));
    members.push_back(
        MembershipFunction::right_shoulder(centers[n - 2], centers[n - 1]));
    return FuzzyPartition(std::move(members), centers);
  }

  static FuzzyPartition default_partition() {
    return from_centers({-0.5, -0.1, -0.05, 0.0, 0.05, 0.1, 0.5});
  }

  std::size_t size() const { return members_.size(); }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<MembershipFunction>& members() const { return members_; }

  void firing_strengths(double u, std::vector<double>& w) const {
    w.resize(members_.size());
    for (std::size_t r = 0; r < members_.size(); ++r) w[r] = members_[r].grade(u);
  }

  std::vector<double> firing_strengths(double u) const {
    std::vector<double> w;
    firing_strengths(u, w);
    return w;
  }

  // Normalized basis: psi_r = w_r / sum(w). A zero sum means the partition
  // fails to cover u and is reported as an error; from_centers() layouts
  // cover every input, so reaching it indicates a malformed custom partition.
  void basis(double u, std::vector<double>& psi) const {
    firing_strengths(u, psi);
    double sum = 0.0;
    for (double w : psi) sum += w;
    if (!(sum > 0.0))
      throw std::domain_error("fuzzy partition does not cover input u = " +
                              std::to_string(u));
    for (double& w : psi) w /= sum;
  }

  std::vector<double> basis(double u) const {
    std::vector<double> psi;
    basis(u, psi);
    return psi;
  }

 private:
  static void validate_centers(const std::vector<double>& centers) {
    if (centers.size() < 2)
      throw std::invalid_argument("partition needs at least 2 centers");
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (!std::isfinite(centers[i]))
        throw std::invalid_argument("partition centers must be finite");
      if (i > 0 && !(centers[i - 1] < centers[i]))
        throw std::invalid_argument("partition centers must be strictly increasing");
    }
  }

  std::vector<MembershipFunction> members_;
  std::vector<double> centers_;
};

// Zero-order TSK output: inner product of the rule outputs with the basis.
inline double infer(std::span<const double> rule_outputs, std::span<const double> basis) {
  if (rule_outputs.size() != basis.size())
    throw std::invalid_argument("rule outputs and basis must have equal length");
  double out = 0.0;
  for (std::size_t r = 0; r < basis.size(); ++r) out += rule_outputs[r] * basis[r];
  return out;
}

}  // namespace afc

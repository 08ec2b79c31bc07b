#pragma once

#include <cstddef>
#include <vector>

#include "coact/types.hpp"

namespace coact {

inline constexpr double kGradientFloor = 1e-3;
inline constexpr double kGradientCeiling = 1e3;

// Monotone piecewise-linear time mapping parameterized by its gradient
// sampled on the reference grid. Node k sits at k * dt in reference time;
// interval k uses gradient[k]. gradient.size() == node count (the last entry
// mirrors the final interval so node-indexed queries stay in range).
class TimeWarp {
 public:
  TimeWarp() : dt_(0.2), origin_offset_(0.0), gradient_{1.0}, cumulative_{0.0} {}
  TimeWarp(double dt, std::vector<double> gradient, double origin_offset = 0.0);

  static TimeWarp identity(double dt, std::size_t nodes);
  static TimeWarp constant(double dt, std::size_t nodes, double g);

  double dt() const { return dt_; }
  double origin_offset() const { return origin_offset_; }
  std::size_t nodes() const { return gradient_.size(); }
  double ref_duration() const { return static_cast<double>(nodes() - 1) * dt_; }
  // |psi|: duration of the mapped (target/execution) timeline.
  double length() const { return cumulative_.back(); }

  const std::vector<double>& gradient() const { return gradient_; }
  double gradient_at(std::size_t node) const { return gradient_[node]; }

  // psi(t), clamped to [0, |psi|] outside the reference span.
  double eval(double t) const;
  // psi^{-1}(s), exact inversion of the piecewise-linear map, clamped.
  double eval_inverse(double s) const;

  // Inverse mapping resampled onto a uniform grid of the target timeline.
  TimeWarp inverse() const;

 private:
  double dt_;
  double origin_offset_;
  std::vector<double> gradient_;
  std::vector<double> cumulative_;  // psi at each node, cumulative_[0] = 0
};

// Pointwise envelopes over the demonstration warps (per reference node).
struct WarpBounds {
  std::vector<double> min_gradient;
  std::vector<double> max_gradient;
  std::vector<double> mean_gradient;

  std::size_t nodes() const { return mean_gradient.size(); }
};

WarpBounds gradient_bounds(const std::vector<TimeWarp>& warps);

// Equal weights on the Cartesian channels only, zero elsewhere.
std::vector<double> cartesian_alignment_weights(std::size_t channels);

// Weighted discretized alignment loss of a candidate warp,
// sum_t (x_tgt(psi(t)) - x_ref(t))' diag(w) (.) * dt.
double warp_loss(const Demonstration& reference, const Demonstration& target,
                 const std::vector<double>& weights, const TimeWarp& warp);

// Slope-constrained DP alignment on the full lattice followed by gradient
// smoothing and endpoint renormalization.
TimeWarp optimize_warp(const Demonstration& reference, const Demonstration& target,
                       const std::vector<double>& weights,
                       double gradient_floor = kGradientFloor,
                       double gradient_ceiling = kGradientCeiling,
                       int smooth_window = 5);

}  // namespace coact

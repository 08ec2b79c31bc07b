#pragma once

#include <cstddef>
#include <vector>

#include "coact/types.hpp"
#include "coact/warp.hpp"

namespace coact {

// Operator joystick deflection, |u| <= 1.
struct OperatorInput {
  double u = 0.0;
};

// Learned task model over the reference grid: augmented mean trajectory
// (state channels plus the mean warp gradient), the pooled demonstration
// variance, and the variance-derived correction direction per step.
struct BehaviorModel {
  double dt = 0.2;
  std::size_t state_channels = 0;  // m; augmented vectors hold m+1 entries
  int quat_offset = -1;
  std::vector<std::vector<double>> mean;   // steps x (m+1)
  std::vector<double> variance;            // steps
  std::vector<std::vector<double>> basis;  // steps x (m+1), unit in the W+ metric
  std::vector<double> scale;               // steps, max correction magnitude

  std::size_t steps() const { return mean.size(); }
  std::size_t gradient_channel() const { return state_channels; }
};

std::vector<std::vector<double>> build_mean(const DemonstrationSet& set,
                                            const std::vector<TimeWarp>& warps,
                                            const WarpBounds& bounds);

std::vector<double> variance_profile(const DemonstrationSet& set,
                                     const std::vector<TimeWarp>& warps,
                                     const std::vector<std::vector<double>>& mean,
                                     const ChannelWeights& weights_plus);

// Per-step principal correction direction from a centered window of
// mean-removed aligned samples, plus the admissible correction magnitude.
void correction_basis(const DemonstrationSet& set, const std::vector<TimeWarp>& warps,
                      const std::vector<std::vector<double>>& mean,
                      const ChannelWeights& weights_plus, const WarpBounds& bounds, int window,
                      std::vector<std::vector<double>>& basis_out, std::vector<double>& scale_out);

BehaviorModel build_behavior_model(const DemonstrationSet& set, const std::vector<TimeWarp>& warps,
                                   const WarpBounds& bounds, const ChannelWeights& weights_plus,
                                   int window = 10);

// x_f+(u, t) = mu+(t) + scale(t) * u * basis(t), quaternion renormalized.
std::vector<double> apply_correction(const BehaviorModel& model, std::size_t t, double u);

}  // namespace coact

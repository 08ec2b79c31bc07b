#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coact/types.hpp"

namespace coact {

// Loads a demonstration set from CSV. One header row names the channels;
// demonstrations are separated by blank lines. Non-uniform timestamps are
// resampled onto a uniform grid at dt by linear interpolation; quaternion
// channels are renormalized afterward.
DemonstrationSet load_demonstrations(const std::string& path, const ChannelSchema& schema,
                                     double dt = 0.2);

void save_demonstrations(const DemonstrationSet& set, const std::string& path);

ChannelWeights weights_from_ranges(const std::vector<double>& ranges);

// Synthetic analogue of the sanding task: concatenated passes with smooth
// transitions, correction-needing windows with extra force and slower
// timing, and per-demo smooth time reparameterizations.
struct SynthTaskSpec {
  int passes = 4;
  double pass_duration = 8.0;
  double transition_duration = 8.0;
  double lead_duration = 2.0;
  // Fraction of correction-needing time on every pass but the last.
  double need_fraction = 0.5;
  int sections_per_pass = 2;
  int n_demos = 6;
  // Per-demo warp gradient bounds versus the nominal timeline.
  double min_jitter = 0.7;
  double max_jitter = 1.4;
  double dt = 0.2;
  double force_base = 0.5;
  double force_need = 8.0;
  double force_noise = 3.0;
  // Timing slowdown inside need windows (multiplicative, clamped to jitter).
  double need_slowdown = 1.2;

  double nominal_duration() const;
  void validate() const;
};

// Which reference times genuinely require correction. Hidden from the
// scheduler; drives the scripted operator and the acceptance checks.
struct GroundTruthNeed {
  double dt = 0.2;
  std::vector<std::uint8_t> need;  // per reference node

  double need_fraction() const;
};

std::pair<DemonstrationSet, GroundTruthNeed> synthesize_task(const SynthTaskSpec& spec,
                                                             std::uint64_t rng_seed);

}  // namespace coact

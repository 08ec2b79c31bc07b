#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coact/common.hpp"

namespace coact {

// One timestamped state vector. `values` has exactly m entries with m fixed
// across a demonstration set.
struct StateSample {
  double t = 0.0;
  std::vector<double> values;
};

// Channel layout shared by a demonstration set. The default layout is
// x,y,z, qx,qy,qz,qw, fx,fy,fz, valve with the quaternion block at index 3.
struct ChannelSchema {
  std::vector<std::string> names;
  int quat_offset = -1;

  static ChannelSchema standard();

  std::size_t channels() const { return names.size(); }
};

// Uniformly sampled multivariate time series. Timestamps are implicit:
// sample k lives at k * dt.
class Demonstration {
 public:
  Demonstration(double dt, std::vector<std::vector<double>> samples);

  double dt() const { return dt_; }
  std::size_t size() const { return samples_.size(); }
  std::size_t channels() const { return samples_.empty() ? 0 : samples_[0].size(); }
  double duration() const { return static_cast<double>(size() - 1) * dt_; }

  const std::vector<double>& sample(std::size_t k) const { return samples_[k]; }
  std::vector<double>& sample(std::size_t k) { return samples_[k]; }
  const std::vector<std::vector<double>>& samples() const { return samples_; }

  StateSample sample_at(std::size_t k) const { return {static_cast<double>(k) * dt_, samples_[k]}; }

  // Linear interpolation at time t (clamped to [0, duration]). When
  // quat_offset >= 0 the quaternion block is renormalized after
  // interpolation.
  std::vector<double> state_at(double t, int quat_offset = -1) const;

  void normalize_quaternions(int quat_offset);

 private:
  double dt_;
  std::vector<std::vector<double>> samples_;
};

struct DemonstrationSet {
  std::vector<Demonstration> demos;
  ChannelSchema schema;

  std::size_t size() const { return demos.size(); }
  std::size_t channels() const { return schema.channels(); }
  const Demonstration& reference() const { return demos.front(); }

  // Enforces n_d >= 2, a shared channel count and a shared sample rate.
  void validate() const;
};

// Diagonal weighting from expected per-channel ranges, w = 1/r^2.
struct ChannelWeights {
  std::vector<double> ranges;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

}  // namespace coact

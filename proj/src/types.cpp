#include "coact/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace coact {

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ChannelSchema ChannelSchema::standard() {
  ChannelSchema s;
  s.names = {"x", "y", "z", "qx", "qy", "qz", "qw", "fx", "fy", "fz", "valve"};
  s.quat_offset = 3;
  return s;
}

Demonstration::Demonstration(double dt, std::vector<std::vector<double>> samples)
    : dt_(dt), samples_(std::move(samples)) {
  if (dt_ <= 0.0) throw domain_error("sample rate must be positive");
  if (samples_.size() < 2) throw domain_error("demonstration needs at least 2 samples");
  const std::size_t m = samples_[0].size();
  for (const auto& s : samples_) {
    if (s.size() != m) throw schema_error("inconsistent channel count within demonstration");
  }
}

std::vector<double> Demonstration::state_at(double t, int quat_offset) const {
  t = std::clamp(t, 0.0, duration());
  const double idx = t / dt_;
  const std::size_t k0 = std::min(static_cast<std::size_t>(idx), size() - 2);
  const double s = idx - static_cast<double>(k0);
  std::vector<double> out(channels());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = lerp(samples_[k0][c], samples_[k0 + 1][c], s);
  }
  if (quat_offset >= 0) normalize_quaternion(out, quat_offset);
  return out;
}

void Demonstration::normalize_quaternions(int quat_offset) {
  if (quat_offset < 0) return;
  for (auto& s : samples_) normalize_quaternion(s, quat_offset);
}

void DemonstrationSet::validate() const {
  if (demos.size() < 2) {
    throw domain_error("demonstration set requires at least 2 demonstrations");
  }
  const std::size_t m = schema.channels();
  const double dt = demos.front().dt();
  for (const auto& d : demos) {
    if (d.channels() != m) throw schema_error("demonstration channel count does not match schema");
    if (std::abs(d.dt() - dt) > 1e-12) throw schema_error("mixed sample rates in demonstration set");
  }
}

}  // namespace coact

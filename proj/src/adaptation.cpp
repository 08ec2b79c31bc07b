#include "coact/adaptation.hpp"

#include <algorithm>
#include <cmath>

namespace coact {

SpeedFactors speed_factors(const TimeWarp& exec_warp, const WarpBounds& bounds, double s) {
  const double r = exec_warp.eval_inverse(std::clamp(s, 0.0, exec_warp.length()));
  const std::size_t node = std::min<std::size_t>(
      static_cast<std::size_t>(std::lround(r / exec_warp.dt())), exec_warp.nodes() - 1);
  const double g = exec_warp.gradient_at(node);
  return {g / bounds.min_gradient[node], g / bounds.max_gradient[node]};
}

double response_step(double delta_t, double fast, double slow, double dt) {
  const double gap = -delta_t;
  const double slowest = slow * dt;
  const double fastest = fast * dt;
  if (gap < slowest) return slowest;
  if (gap < fastest) return gap;
  return fastest;
}

std::pair<double, double> high_conf_step(double delta_t_ab, double fast_a, double fast_b,
                                         double slow_a, double dt) {
  if (delta_t_ab < 0.0) throw domain_error("high_conf_step: agent a must be the ahead agent");
  const double fastest_a = fast_a * dt;
  const double fastest_b = fast_b * dt;
  if (fastest_b >= fastest_a + delta_t_ab) {
    // Behind agent can catch up exactly without overtaking.
    return {fastest_a, fastest_a + delta_t_ab};
  }
  const double dt_b = fastest_b;
  const double dt_a = response_step(delta_t_ab - dt_b, fast_a, slow_a, dt);
  return {dt_a, dt_b};
}

}  // namespace coact

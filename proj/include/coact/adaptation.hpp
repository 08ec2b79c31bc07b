#pragma once

#include <utility>

#include "coact/warp.hpp"

namespace coact {

// How much faster (F) or slower (S) an agent can run at its current point
// than scheduled: scheduled gradient divided by the demonstration limits.
struct SpeedFactors {
  double fast = 1.0;  // F
  double slow = 1.0;  // S
};

// Factors at execution-timeline position s of the given execution warp.
SpeedFactors speed_factors(const TimeWarp& exec_warp, const WarpBounds& bounds, double s);

// Three-branch response of a high-confidence agent to the current deviation
// delta_t = (own position) - (other position): slow down if ahead, close the
// gap exactly if possible, otherwise go as fast as allowed.
double response_step(double delta_t, double fast, double slow, double dt);

// Coordinated step for two high-confidence agents; a is ahead (or either
// when the deviation is zero). Returns (dt_a, dt_b). The behind agent
// catches up without overtaking.
std::pair<double, double> high_conf_step(double delta_t_ab, double fast_a, double fast_b,
                                         double slow_a, double dt);

}  // namespace coact

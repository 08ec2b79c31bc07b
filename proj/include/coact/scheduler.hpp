#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coact/common.hpp"
#include "coact/warp.hpp"

namespace coact {

// Two execution warps plus the start offset of the second agent.
struct Schedule {
  TimeWarp exec1;
  TimeWarp exec2;
  double tau = 0.0;

  double total_time() const { return std::max(exec1.length(), tau + exec2.length()); }
  const TimeWarp& exec(int agent) const { return agent == 0 ? exec1 : exec2; }
  double offset(int agent) const { return agent == 0 ? 0.0 : tau; }

  std::string to_json(bool feasible, double cost) const;
};

// Eq. 15 global-clock mapping: reference time of an agent at global time t,
// zero before its start and clamped at its end.
double agent_reference_time(const Schedule& schedule, int agent, double t);

// Whether the agent is mid-execution at global time t. The end instant
// counts as finished so a serial schedule has no overlapping sample.
bool agent_running(const Schedule& schedule, int agent, double t);

// Eq. 16: per-agent confidence at a global time, 1 when not running.
std::array<int, 2> biconfidence(const Schedule& schedule, const std::vector<std::uint8_t>& conf,
                                double t);

struct Violation {
  bool ok = true;
  int constraint = 0;  // 1..5 when violated
  double time = 0.0;

  explicit operator bool() const { return ok; }
};

// Eq. 19 constraint list, checked in order on the dt grid; margin procedure
// last.
Violation check_constraints(const Schedule& schedule, const WarpBounds& bounds,
                            const std::vector<std::uint8_t>& conf);

// Algorithm-2 worst-case walk over adjacent low-confidence regions.
// Low-confidence regions are dilated by one sample per side as a
// discretization buffer.
bool sufficient_margins(const Schedule& schedule, const WarpBounds& bounds,
                        const std::vector<std::uint8_t>& conf);

struct OptimizerConfig {
  int samples = 500;
  std::uint64_t rng_seed = 0;
  double fast_bias = 0.25;  // probability of forcing the fastest segment speed
  int threads = 1;
};

// Draws one candidate: mean gradient on low-confidence steps, a per-segment
// random speed within the envelope on high-confidence steps, uniform offset.
Schedule sample_schedule(const WarpBounds& bounds, const std::vector<std::uint8_t>& conf,
                         double dt, double fast_bias, Rng& rng);

// Always-feasible serial fallback at the mean warp.
Schedule serial_mean_schedule(const WarpBounds& bounds, double dt);

// Anytime sampler: best feasible candidate by total time, with the serial
// executions and the previous schedule as fallbacks. Deterministic given the
// seed regardless of thread count.
Schedule optimize_schedule(const WarpBounds& bounds, const std::vector<std::uint8_t>& conf,
                           double dt, const OptimizerConfig& config,
                           const Schedule* fallback = nullptr);

// Gantt-style rows (t, conf_1, conf_2) on the global grid.
std::string schedule_gantt_csv(const Schedule& schedule, const std::vector<std::uint8_t>& conf);

}  // namespace coact

#include "coact/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "coact/adaptation.hpp"

namespace coact {

namespace {

std::size_t nearest_node(double t, double dt, std::size_t nodes) {
  const long k = std::clamp(std::lround(t / dt), 0l, static_cast<long>(nodes) - 1);
  return static_cast<std::size_t>(k);
}

// Shrink high-confidence runs by one sample per side (dilates the
// low-confidence regions) as a buffer against discretization error.
std::vector<std::uint8_t> dilate_low_confidence(const std::vector<std::uint8_t>& conf) {
  const std::size_t n = conf.size();
  std::vector<std::uint8_t> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const bool lo = k > 0 ? conf[k - 1] : conf[k];
    const bool hi = k + 1 < n ? conf[k + 1] : conf[k];
    out[k] = (conf[k] && lo && hi) ? 1 : 0;
  }
  return out;
}

int conf_at(const Schedule& schedule, const std::vector<std::uint8_t>& conf, int agent, double t) {
  if (!agent_running(schedule, agent, t)) return 1;
  const auto& w = schedule.exec(agent);
  const double r = w.eval_inverse(t - schedule.offset(agent));
  return conf[nearest_node(r, w.dt(), w.nodes())] ? 1 : 0;
}

struct LcRegion {
  int agent = 0;
  double start = 0.0;
  double end = 0.0;
};

// Exact low-confidence intervals on the global timeline, one per contiguous
// node run, clipped to the agent's running span. Node k owns reference times
// within half a sample of k * dt, matching the nearest-node lookups.
std::vector<LcRegion> lc_regions(const Schedule& schedule,
                                 const std::vector<std::uint8_t>& conf) {
  std::vector<LcRegion> out;
  const double dt = schedule.exec1.dt();
  for (int agent = 0; agent < 2; ++agent) {
    const auto& w = schedule.exec(agent);
    const double off = schedule.offset(agent);
    const std::size_t n = w.nodes();
    std::size_t k = 0;
    while (k < n) {
      if (conf[k]) {
        ++k;
        continue;
      }
      std::size_t k1 = k;
      while (k1 + 1 < n && !conf[k1 + 1]) ++k1;
      const double r0 = std::max(0.0, (static_cast<double>(k) - 0.5) * dt);
      const double r1 = std::min(w.ref_duration(), (static_cast<double>(k1) + 0.5) * dt);
      const double g0 = off + w.eval(r0);
      const double g1 = std::min(off + w.eval(r1), off + w.length());
      if (g1 > g0 + 1e-12) out.push_back({agent, g0, g1});
      k = k1 + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const LcRegion& a, const LcRegion& b) {
    return a.start < b.start || (a.start == b.start && a.agent < b.agent);
  });
  return out;
}

// First cross-agent intersection of positive measure, if any.
std::optional<double> lc_overlap(const std::vector<LcRegion>& regions) {
  double last_end[2] = {-1.0, -1.0};
  for (const auto& r : regions) {
    const int other = 1 - r.agent;
    if (r.start < last_end[other] - 1e-9) return r.start;
    last_end[r.agent] = std::max(last_end[r.agent], r.end);
  }
  return std::nullopt;
}

}  // namespace

std::string Schedule::to_json(bool feasible, double cost) const {
  nlohmann::json j;
  j["tau"] = tau;
  j["gradients_1"] = exec1.gradient();
  j["gradients_2"] = exec2.gradient();
  j["total_time"] = total_time();
  j["feasible"] = feasible;
  j["cost"] = cost;
  return j.dump(2);
}

double agent_reference_time(const Schedule& schedule, int agent, double t) {
  const auto& w = schedule.exec(agent);
  const double off = schedule.offset(agent);
  if (t < off) return 0.0;
  if (t > off + w.length()) return w.ref_duration();
  return w.eval_inverse(t - off);
}

bool agent_running(const Schedule& schedule, int agent, double t) {
  const double off = schedule.offset(agent);
  return t >= off - 1e-9 && t < off + schedule.exec(agent).length() - 1e-9;
}

std::array<int, 2> biconfidence(const Schedule& schedule, const std::vector<std::uint8_t>& conf,
                                double t) {
  return {conf_at(schedule, conf, 0, t), conf_at(schedule, conf, 1, t)};
}

Violation check_constraints(const Schedule& schedule, const WarpBounds& bounds,
                            const std::vector<std::uint8_t>& conf) {
  const double dt = schedule.exec1.dt();
  const std::size_t n = bounds.nodes();

  // (1) warps within the demonstration limits
  for (int agent = 0; agent < 2; ++agent) {
    const auto& g = schedule.exec(agent).gradient();
    for (std::size_t k = 0; k < n; ++k) {
      if (g[k] < bounds.min_gradient[k] - 1e-12 || g[k] > bounds.max_gradient[k] + 1e-12) {
        return {false, 1, static_cast<double>(k) * dt};
      }
    }
  }
  // (2) offset range
  if (schedule.tau < -1e-12 || schedule.tau > schedule.exec1.length() + 1e-12) {
    return {false, 2, schedule.tau};
  }
  // (3) no simultaneous low confidence, checked on exact global intervals
  // (the dt grid can step over overlaps narrower than one sample)
  if (const auto hit = lc_overlap(lc_regions(schedule, conf))) {
    return {false, 3, *hit};
  }
  // (4) low-confidence steps follow the mean warp
  for (int agent = 0; agent < 2; ++agent) {
    const auto& g = schedule.exec(agent).gradient();
    for (std::size_t k = 0; k < n; ++k) {
      if (!conf[k] && std::abs(g[k] - bounds.mean_gradient[k]) > 1e-9) {
        return {false, 4, static_cast<double>(k) * dt};
      }
    }
  }
  // (5) worst-case timing margins
  if (!sufficient_margins(schedule, bounds, conf)) {
    return {false, 5, 0.0};
  }
  return {};
}

namespace {

// Worst-case walk between one pair of adjacent cross-agent low-confidence
// regions. Positions are kept in the global schedule frame (start offset
// plus execution progress) so both clocks begin equal at tau.
bool check_margin(const Schedule& schedule, const WarpBounds& bounds,
                  const std::vector<std::uint8_t>& conf_dil, int prev_agent, double prev_end,
                  int cur_agent, double cur_start) {
  if (prev_agent == cur_agent) return true;

  const double dt = schedule.exec1.dt();
  auto factors = [&](int agent, double pos) {
    return speed_factors(schedule.exec(agent), bounds, pos - schedule.offset(agent));
  };

  double t_p = schedule.tau;
  double t_c = schedule.tau;
  const long cap = 3 * static_cast<long>(schedule.total_time() / dt) + 100;
  for (long iter = 0; iter < cap; ++iter) {
    if (t_p >= prev_end - 1e-9) return true;
    if (t_c >= cur_start - 1e-9) return false;  // possible overlap
    const int cp = conf_at(schedule, conf_dil, prev_agent, t_p);
    const int cc = conf_at(schedule, conf_dil, cur_agent, t_c);
    if (cc == 0 || cp == 0) {
      if (cc == 0) {
        // Worst case: the current-region agent runs as fast as possible.
        t_c += factors(cur_agent, t_c).fast * dt;
        const auto fs = factors(prev_agent, t_p);
        t_p += response_step(t_p - t_c, fs.fast, fs.slow, dt);
      } else {
        // Worst case: the previous-region agent runs as slow as possible.
        t_p += factors(prev_agent, t_p).slow * dt;
        const auto fs = factors(cur_agent, t_c);
        t_c += response_step(t_c - t_p, fs.fast, fs.slow, dt);
      }
    } else {
      const auto fp = factors(prev_agent, t_p);
      const auto fc = factors(cur_agent, t_c);
      if (t_c - t_p > 0.0) {
        const auto [dc, dp] = high_conf_step(t_c - t_p, fc.fast, fp.fast, fc.slow, dt);
        t_c += dc;
        t_p += dp;
      } else {
        const auto [dp, dc] = high_conf_step(t_p - t_c, fp.fast, fc.fast, fp.slow, dt);
        t_p += dp;
        t_c += dc;
      }
    }
  }
  return false;
}

}  // namespace

bool sufficient_margins(const Schedule& schedule, const WarpBounds& bounds,
                        const std::vector<std::uint8_t>& conf) {
  const auto conf_dil = dilate_low_confidence(conf);
  const auto regions = lc_regions(schedule, conf_dil);
  // Even the widened regions must stay disjoint across agents.
  if (lc_overlap(regions)) return false;
  for (std::size_t k = 1; k < regions.size(); ++k) {
    const LcRegion& prev = regions[k - 1];
    const LcRegion& cur = regions[k];
    if (prev.agent == cur.agent) continue;
    if (!check_margin(schedule, bounds, conf_dil, prev.agent, prev.end, cur.agent, cur.start)) {
      return false;
    }
  }
  return true;
}

Schedule sample_schedule(const WarpBounds& bounds, const std::vector<std::uint8_t>& conf,
                         double dt, double fast_bias, Rng& rng) {
  const std::size_t n = bounds.nodes();
  auto draw_warp = [&]() {
    std::vector<double> g(n);
    double lambda = 0.0;
    bool in_segment = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (!conf[k]) {
        g[k] = bounds.mean_gradient[k];
        in_segment = false;
        continue;
      }
      if (!in_segment) {
        lambda = rng.bernoulli(fast_bias) ? 0.0 : rng.uniform();
        in_segment = true;
      }
      g[k] = bounds.min_gradient[k] + lambda * (bounds.max_gradient[k] - bounds.min_gradient[k]);
    }
    return TimeWarp(dt, std::move(g));
  };
  Schedule s{draw_warp(), draw_warp(), 0.0};
  s.tau = rng.uniform(0.0, s.exec1.length());
  return s;
}

Schedule serial_mean_schedule(const WarpBounds& bounds, double dt) {
  TimeWarp mean(dt, bounds.mean_gradient);
  const double tau = mean.length();
  return {mean, mean, tau};
}

namespace {

Schedule fastest_serial_schedule(const WarpBounds& bounds, const std::vector<std::uint8_t>& conf,
                                 double dt) {
  std::vector<double> g(bounds.nodes());
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] = conf[k] ? bounds.min_gradient[k] : bounds.mean_gradient[k];
  }
  TimeWarp w(dt, std::move(g));
  const double tau = w.length();
  return {w, w, tau};
}

struct Candidate {
  Schedule schedule;
  double cost = 0.0;
  long order = 0;  // deterministic tie-break, lower wins
};

}  // namespace

Schedule optimize_schedule(const WarpBounds& bounds, const std::vector<std::uint8_t>& conf,
                           double dt, const OptimizerConfig& config, const Schedule* fallback) {
  if (config.samples < 1) throw config_error("optimizer: sample budget must be >= 1");

  auto evaluate_range = [&](int lo, int hi) -> std::optional<Candidate> {
    std::optional<Candidate> best;
    for (int k = lo; k < hi; ++k) {
      Rng rng = Rng::derive(config.rng_seed, static_cast<std::uint64_t>(k) + 1);
      Schedule s = sample_schedule(bounds, conf, dt, config.fast_bias, rng);
      if (!check_constraints(s, bounds, conf)) continue;
      const double cost = s.total_time();
      if (!best || cost < best->cost || (cost == best->cost && k < best->order)) {
        best = Candidate{std::move(s), cost, k};
      }
    }
    return best;
  };

  std::optional<Candidate> best;
  if (config.threads <= 1) {
    best = evaluate_range(0, config.samples);
  } else {
    const int chunks = std::min(config.threads, config.samples);
    std::vector<std::future<std::optional<Candidate>>> futures;
    for (int c = 0; c < chunks; ++c) {
      const int lo = config.samples * c / chunks;
      const int hi = config.samples * (c + 1) / chunks;
      futures.push_back(std::async(std::launch::async, evaluate_range, lo, hi));
    }
    for (auto& f : futures) {
      auto local = f.get();
      if (!local) continue;
      if (!best || local->cost < best->cost ||
          (local->cost == best->cost && local->order < best->order)) {
        best = std::move(local);
      }
    }
  }

  // Fallback family: fastest serial, mean serial, previous solution.
  std::vector<Candidate> pool;
  long order = config.samples;
  if (best) pool.push_back(std::move(*best));
  {
    Schedule fast_serial = fastest_serial_schedule(bounds, conf, dt);
    if (check_constraints(fast_serial, bounds, conf)) {
      pool.push_back({std::move(fast_serial), 0.0, ++order});
      pool.back().cost = pool.back().schedule.total_time();
    }
  }
  {
    Schedule serial = serial_mean_schedule(bounds, dt);
    pool.push_back({std::move(serial), 0.0, ++order});
    pool.back().cost = pool.back().schedule.total_time();
  }
  if (fallback != nullptr && check_constraints(*fallback, bounds, conf)) {
    pool.push_back({*fallback, fallback->total_time(), ++order});
  }

  std::size_t arg = 0;
  for (std::size_t k = 1; k < pool.size(); ++k) {
    if (pool[k].cost < pool[arg].cost - 1e-12) arg = k;
  }
  return std::move(pool[arg].schedule);
}

std::string schedule_gantt_csv(const Schedule& schedule, const std::vector<std::uint8_t>& conf) {
  std::ostringstream out;
  out << "t,conf_1,conf_2\n";
  const double dt = schedule.exec1.dt();
  const double total = schedule.total_time();
  for (double t = 0.0; t <= total + 0.5 * dt; t += dt) {
    const auto bc = biconfidence(schedule, conf, t);
    out << format_g9(t) << "," << bc[0] << "," << bc[1] << "\n";
  }
  return out.str();
}

}  // namespace coact

#include "coact/warp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace coact {

TimeWarp::TimeWarp(double dt, std::vector<double> gradient, double origin_offset)
    : dt_(dt), origin_offset_(origin_offset), gradient_(std::move(gradient)) {
  if (dt_ <= 0.0) throw domain_error("warp sample rate must be positive");
  if (gradient_.size() < 2) throw domain_error("warp needs at least 2 nodes");
  for (double g : gradient_) {
    if (!(g >= kGradientFloor) || !(g <= kGradientCeiling)) {
      throw domain_error("warp gradient outside [floor, ceiling]");
    }
  }
  cumulative_.resize(gradient_.size());
  cumulative_[0] = 0.0;
  for (std::size_t k = 1; k < gradient_.size(); ++k) {
    cumulative_[k] = cumulative_[k - 1] + gradient_[k - 1] * dt_;
  }
}

TimeWarp TimeWarp::identity(double dt, std::size_t nodes) {
  return TimeWarp(dt, std::vector<double>(nodes, 1.0));
}

TimeWarp TimeWarp::constant(double dt, std::size_t nodes, double g) {
  return TimeWarp(dt, std::vector<double>(nodes, g));
}

double TimeWarp::eval(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= ref_duration()) return length();
  const double idx = t / dt_;
  const std::size_t k = std::min(static_cast<std::size_t>(idx), nodes() - 2);
  return cumulative_[k] + gradient_[k] * (t - static_cast<double>(k) * dt_);
}

double TimeWarp::eval_inverse(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= length()) return ref_duration();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return static_cast<double>(k) * dt_ + (s - cumulative_[k]) / gradient_[k];
}

TimeWarp TimeWarp::inverse() const {
  const double len = length();
  const std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(len / dt_)) + 1);
  std::vector<double> grad(n);
  double prev = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double next = eval_inverse(std::min(static_cast<double>(k + 1) * dt_, len));
    grad[k] = std::clamp((next - prev) / dt_, kGradientFloor, kGradientCeiling);
    prev = next;
  }
  grad[n - 1] = grad[n - 2];
  return TimeWarp(dt_, std::move(grad));
}

WarpBounds gradient_bounds(const std::vector<TimeWarp>& warps) {
  if (warps.size() < 2) throw domain_error("gradient_bounds requires at least 2 warps");
  const std::size_t n = warps.front().nodes();
  for (const auto& w : warps) {
    if (w.nodes() != n) throw domain_error("gradient_bounds: warp reference lengths differ");
  }
  WarpBounds b;
  b.min_gradient.assign(n, std::numeric_limits<double>::infinity());
  b.max_gradient.assign(n, -std::numeric_limits<double>::infinity());
  b.mean_gradient.assign(n, 0.0);
  for (const auto& w : warps) {
    for (std::size_t k = 0; k < n; ++k) {
      const double g = w.gradient_at(k);
      b.min_gradient[k] = std::min(b.min_gradient[k], g);
      b.max_gradient[k] = std::max(b.max_gradient[k], g);
      b.mean_gradient[k] += g;
    }
  }
  const double inv = 1.0 / static_cast<double>(warps.size());
  for (std::size_t k = 0; k < n; ++k) b.mean_gradient[k] *= inv;
  return b;
}

std::vector<double> cartesian_alignment_weights(std::size_t channels) {
  std::vector<double> w(channels, 0.0);
  for (std::size_t c = 0; c < std::min<std::size_t>(3, channels); ++c) w[c] = 1.0;
  return w;
}

namespace {

double weighted_sq_error(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] == 0.0) continue;
    const double e = a[c] - b[c];
    s += w[c] * e * e;
  }
  return s;
}

}  // namespace

double warp_loss(const Demonstration& reference, const Demonstration& target,
                 const std::vector<double>& weights, const TimeWarp& warp) {
  double loss = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double t = static_cast<double>(k) * reference.dt();
    const auto tgt = target.state_at(warp.eval(t));
    loss += weighted_sq_error(reference.sample(k), tgt, weights);
  }
  return loss * reference.dt();
}

TimeWarp optimize_warp(const Demonstration& reference, const Demonstration& target,
                       const std::vector<double>& weights, double gradient_floor,
                       double gradient_ceiling, int smooth_window) {
  if (reference.channels() != target.channels()) {
    throw schema_error("optimize_warp: channel counts differ");
  }
  if (std::abs(reference.dt() - target.dt()) > 1e-12) {
    throw schema_error("optimize_warp: sample rates differ");
  }
  const std::size_t n = reference.size();
  const std::size_t m = target.size();
  const double dt = reference.dt();

  // Lattice moves (ref steps, target steps); local slopes span [1/3, 3].
  static constexpr std::array<std::array<int, 2>, 5> kMoves = {
      {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}}};

  const double ratio = static_cast<double>(m - 1) / static_cast<double>(n - 1);
  if (ratio > 3.0 + 1e-9 || ratio < 1.0 / 3.0 - 1e-9) {
    throw infeasibility_error("optimize_warp: no monotone path, length ratio " +
                              std::to_string(ratio) + " outside [1/3, 3]");
  }

  // Node cost matrix.
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i * m + j] = weighted_sq_error(reference.sample(i), target.sample(j), weights);
    }
  }
  auto cost_interp = [&](std::size_t i, double j) {
    const std::size_t j0 = std::min(static_cast<std::size_t>(j), m - 2);
    const double s = j - static_cast<double>(j0);
    return lerp(cost[i * m + j0], cost[i * m + j0 + 1], s);
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(n * m, inf);
  std::vector<int> parent(n * m, -1);
  dp[0] = cost[0];
  // Tiny preference toward the diagonal to break ties deterministically.
  double cost_scale = 0.0;
  for (double c : cost) cost_scale = std::max(cost_scale, c);
  const double diag_eps = (cost_scale > 0.0 ? cost_scale : 1.0) * 1e-9;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == 0 && j == 0) continue;
      double best = inf;
      int best_move = -1;
      for (int mv = 0; mv < static_cast<int>(kMoves.size()); ++mv) {
        const int a = kMoves[mv][0];
        const int b = kMoves[mv][1];
        if (static_cast<int>(i) < a || static_cast<int>(j) < b) continue;
        const double prev = dp[(i - a) * m + (j - b)];
        if (prev == inf) continue;
        double c = prev;
        for (int s = 1; s <= a; ++s) {
          const double jf = static_cast<double>(j) - b + static_cast<double>(s) * b / a;
          c += cost_interp(i - a + s, jf);
        }
        c += diag_eps * std::abs(static_cast<double>(b) - static_cast<double>(a) * ratio);
        if (c < best) {
          best = c;
          best_move = mv;
        }
      }
      dp[i * m + j] = best;
      parent[i * m + j] = best_move;
    }
  }
  if (dp[(n - 1) * m + (m - 1)] == inf) {
    throw infeasibility_error("optimize_warp: alignment lattice has no feasible path");
  }

  // Backtrack the mapped target index per reference node (fractional on
  // multi-step moves).
  std::vector<double> mapped(n, 0.0);
  {
    std::size_t i = n - 1, j = m - 1;
    mapped[i] = static_cast<double>(j);
    while (i > 0 || j > 0) {
      const int mv = parent[i * m + j];
      const int a = kMoves[mv][0];
      const int b = kMoves[mv][1];
      for (int s = 1; s < a; ++s) {
        mapped[i - s] = static_cast<double>(j) - static_cast<double>(s) * b / a;
      }
      i -= a;
      j -= b;
      mapped[i] = static_cast<double>(j);
    }
  }

  std::vector<double> grad(n);
  for (std::size_t k = 0; k + 1 < n; ++k) grad[k] = mapped[k + 1] - mapped[k];
  grad[n - 1] = grad[n - 2];

  // Moving-average smoothing (centered, truncated at the edges).
  if (smooth_window > 1) {
    const int half = smooth_window / 2;
    std::vector<double> smoothed(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t lo = k >= static_cast<std::size_t>(half) ? k - half : 0;
      const std::size_t hi = std::min(n - 1, k + half);
      double s = 0.0;
      for (std::size_t q = lo; q <= hi; ++q) s += grad[q];
      smoothed[k] = s / static_cast<double>(hi - lo + 1);
    }
    grad = std::move(smoothed);
  }

  for (double& g : grad) g = std::clamp(g, gradient_floor, gradient_ceiling);

  // Re-anchor the endpoint: psi(T_ref) must equal the target duration.
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) total += grad[k];
  const double scale = static_cast<double>(m - 1) / total;
  for (double& g : grad) g = std::clamp(g * scale, gradient_floor, gradient_ceiling);

  return TimeWarp(dt, std::move(grad));
}

}  // namespace coact

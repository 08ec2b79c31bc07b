#include "coact/behavior.hpp"

#include <algorithm>
#include <cmath>

namespace coact {

namespace {

// Augmented aligned sample of demo i at reference node k.
std::vector<double> aligned_augmented(const DemonstrationSet& set, const TimeWarp& warp,
                                      std::size_t demo, std::size_t node) {
  const double t = static_cast<double>(node) * warp.dt();
  auto v = set.demos[demo].state_at(warp.eval(t), set.schema.quat_offset);
  v.push_back(warp.gradient_at(node));
  return v;
}

void check_inputs(const DemonstrationSet& set, const std::vector<TimeWarp>& warps) {
  set.validate();
  if (warps.size() != set.demos.size()) {
    throw domain_error("behavior: one warp per demonstration required");
  }
}

// Dominant eigenvector of a small symmetric matrix by power iteration,
// deterministic init from the largest-diagonal column.
bool dominant_eigenvector(const std::vector<double>& cov, std::size_t dim, std::vector<double>& v,
                          double& value) {
  double max_diag = 0.0;
  std::size_t pivot = 0;
  for (std::size_t c = 0; c < dim; ++c) {
    if (cov[c * dim + c] > max_diag) {
      max_diag = cov[c * dim + c];
      pivot = c;
    }
  }
  if (max_diag < 1e-18) return false;
  v.assign(dim, 0.0);
  for (std::size_t r = 0; r < dim; ++r) v[r] = cov[r * dim + pivot];
  std::vector<double> next(dim);
  value = 0.0;
  for (int it = 0; it < 200; ++it) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-300) return false;
    for (double& x : v) x /= norm;
    for (std::size_t r = 0; r < dim; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) s += cov[r * dim + c] * v[c];
      next[r] = s;
    }
    double rayleigh = 0.0;
    for (std::size_t r = 0; r < dim; ++r) rayleigh += v[r] * next[r];
    std::swap(v, next);
    if (it > 10 && std::abs(rayleigh - value) < 1e-14 * std::max(1.0, rayleigh)) {
      value = rayleigh;
      break;
    }
    value = rayleigh;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm < 1e-300) return false;
  for (double& x : v) x /= norm;
  return value > 1e-18;
}

}  // namespace

std::vector<std::vector<double>> build_mean(const DemonstrationSet& set,
                                            const std::vector<TimeWarp>& warps,
                                            const WarpBounds& bounds) {
  check_inputs(set, warps);
  const std::size_t n = bounds.nodes();
  const std::size_t m = set.channels();
  std::vector<std::vector<double>> mean(n, std::vector<double>(m + 1, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t d = 0; d < set.demos.size(); ++d) {
      const auto v = aligned_augmented(set, warps[d], d, k);
      for (std::size_t c = 0; c < m; ++c) mean[k][c] += v[c];
    }
    const double inv = 1.0 / static_cast<double>(set.demos.size());
    for (std::size_t c = 0; c < m; ++c) mean[k][c] *= inv;
    if (set.schema.quat_offset >= 0) normalize_quaternion(mean[k], set.schema.quat_offset);
    mean[k][m] = bounds.mean_gradient[k];
  }
  return mean;
}

std::vector<double> variance_profile(const DemonstrationSet& set,
                                     const std::vector<TimeWarp>& warps,
                                     const std::vector<std::vector<double>>& mean,
                                     const ChannelWeights& weights_plus) {
  check_inputs(set, warps);
  const std::size_t m = set.channels();
  if (weights_plus.size() != m + 1) {
    throw schema_error("variance_profile: weights must cover m+1 channels");
  }
  const std::size_t n = mean.size();
  std::vector<double> var(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t d = 0; d < set.demos.size(); ++d) {
      const auto v = aligned_augmented(set, warps[d], d, k);
      for (std::size_t c = 0; c <= m; ++c) {
        const double e = v[c] - mean[k][c];
        s += weights_plus.weights[c] * e * e;
      }
    }
    var[k] = s / static_cast<double>(set.demos.size() - 1);
  }
  return var;
}

void correction_basis(const DemonstrationSet& set, const std::vector<TimeWarp>& warps,
                      const std::vector<std::vector<double>>& mean,
                      const ChannelWeights& weights_plus, const WarpBounds& bounds, int window,
                      std::vector<std::vector<double>>& basis_out, std::vector<double>& scale_out) {
  check_inputs(set, warps);
  const std::size_t m = set.channels();
  const std::size_t dim = m + 1;
  const std::size_t n = mean.size();
  std::vector<double> sqrt_w(dim);
  for (std::size_t c = 0; c < dim; ++c) sqrt_w[c] = std::sqrt(weights_plus.weights[c]);

  basis_out.assign(n, std::vector<double>(dim, 0.0));
  scale_out.assign(n, 0.0);

  std::vector<double> cov(dim * dim);
  std::vector<double> y(dim), v;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= static_cast<std::size_t>(window) ? k - window : 0;
    const std::size_t hi = std::min(n - 1, k + static_cast<std::size_t>(window));
    std::fill(cov.begin(), cov.end(), 0.0);
    std::size_t count = 0;
    for (std::size_t q = lo; q <= hi; ++q) {
      for (std::size_t d = 0; d < set.demos.size(); ++d) {
        const auto x = aligned_augmented(set, warps[d], d, q);
        for (std::size_t c = 0; c < dim; ++c) y[c] = sqrt_w[c] * (x[c] - mean[q][c]);
        for (std::size_t r = 0; r < dim; ++r) {
          for (std::size_t c = r; c < dim; ++c) cov[r * dim + c] += y[r] * y[c];
        }
        ++count;
      }
    }
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < r; ++c) cov[r * dim + c] = cov[c * dim + r];
    }
    for (double& x : cov) x /= static_cast<double>(std::max<std::size_t>(count, 1));

    double eigenvalue = 0.0;
    if (!dominant_eigenvector(cov, dim, v, eigenvalue)) continue;

    // Sign convention: largest-magnitude weighted entry positive.
    std::size_t arg = 0;
    for (std::size_t c = 1; c < dim; ++c) {
      if (std::abs(v[c]) > std::abs(v[arg])) arg = c;
    }
    if (v[arg] < 0.0) {
      for (double& x : v) x = -x;
    }
    // Back to state coordinates; unit norm in the W+ metric by construction.
    for (std::size_t c = 0; c < dim; ++c) {
      basis_out[k][c] = sqrt_w[c] > 0.0 ? v[c] / sqrt_w[c] : 0.0;
    }

    // Magnitude: proportional to observed variability, capped so the warp
    // gradient channel can never leave [min, max] for any |u| <= 1.
    double s = 3.0 * std::sqrt(std::max(0.0, /*per-step variance*/ [&] {
      double acc = 0.0;
      for (std::size_t d = 0; d < set.demos.size(); ++d) {
        const auto x = aligned_augmented(set, warps[d], d, k);
        for (std::size_t c = 0; c < dim; ++c) {
          const double e = x[c] - mean[k][c];
          acc += weights_plus.weights[c] * e * e;
        }
      }
      return acc / static_cast<double>(set.demos.size() - 1);
    }()));
    const double d_grad = std::abs(basis_out[k][m]);
    if (d_grad > 1e-12) {
      const double headroom = std::min(mean[k][m] - bounds.min_gradient[k],
                                       bounds.max_gradient[k] - mean[k][m]);
      s = std::min(s, std::max(0.0, headroom) / d_grad);
    }
    scale_out[k] = s;
  }
}

BehaviorModel build_behavior_model(const DemonstrationSet& set, const std::vector<TimeWarp>& warps,
                                   const WarpBounds& bounds, const ChannelWeights& weights_plus,
                                   int window) {
  BehaviorModel model;
  model.dt = set.reference().dt();
  model.state_channels = set.channels();
  model.quat_offset = set.schema.quat_offset;
  model.mean = build_mean(set, warps, bounds);
  model.variance = variance_profile(set, warps, model.mean, weights_plus);
  correction_basis(set, warps, model.mean, weights_plus, bounds, window, model.basis, model.scale);
  return model;
}

std::vector<double> apply_correction(const BehaviorModel& model, std::size_t t, double u) {
  if (t >= model.steps()) throw domain_error("apply_correction: step out of range");
  if (std::abs(u) > 1.0 + 1e-12) throw domain_error("apply_correction: |u| must be <= 1");
  std::vector<double> x = model.mean[t];
  const double s = model.scale[t] * u;
  if (s != 0.0) {
    for (std::size_t c = 0; c < x.size(); ++c) x[c] += s * model.basis[t][c];
    if (model.quat_offset >= 0) normalize_quaternion(x, model.quat_offset);
  }
  return x;
}

}  // namespace coact

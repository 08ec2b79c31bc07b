#include "coact/confidence.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace coact {

void ConfidenceParams::validate() const {
  if (!(gamma_p > 0.0)) throw config_error("gamma_p must be positive");
  if (!(sigma2_max > 0.0) || sigma2_max > 0.25) {
    throw config_error("sigma2_max must be in (0, 0.25]");
  }
  if (!(mu_c > 0.0) || !(mu_c < 1.0)) throw config_error("mu_c must be in (0, 1)");
  if (!(gamma_c > 0.0) || !(gamma_c < 1.0)) throw config_error("gamma_c must be in (0, 1)");
  if (!(epsilon > 0.0)) throw config_error("epsilon must be positive");
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int mIt = 1; mIt <= kMaxIter; ++mIt) {
    const double m = static_cast<double>(mIt);
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double beta_cdf(double x, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw domain_error("beta_cdf: parameters must be positive");
  if (x < 0.0 || x > 1.0) throw domain_error("beta_cdf: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta) +
                          alpha * std::log(x) + beta * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (alpha + 1.0) / (alpha + beta + 2.0)) {
    return front * beta_cf(x, alpha, beta) / alpha;
  }
  return 1.0 - front * beta_cf(1.0 - x, beta, alpha) / beta;
}

std::pair<std::vector<double>, std::vector<double>> prior_from_variance(
    const std::vector<double>& sigma2, const ConfidenceParams& params) {
  params.validate();
  std::vector<double> a0(sigma2.size()), b0(sigma2.size());
  for (std::size_t k = 0; k < sigma2.size(); ++k) {
    if (sigma2[k] < 0.0) throw domain_error("prior_from_variance: variance must be nonnegative");
    const double shaped = 1.0 - std::exp(-params.gamma_p * (sigma2[k] + params.epsilon));
    const double mu = 0.5 * shaped;
    const double var = params.sigma2_max * shaped;
    const double nu = mu * (1.0 - mu) / var - 1.0;
    a0[k] = mu * nu;
    b0[k] = (1.0 - mu) * nu;
    if (!(a0[k] > 0.0) || !(b0[k] > 0.0)) {
      throw config_error("prior_from_variance: parameters yield nonpositive Beta prior");
    }
  }
  return {std::move(a0), std::move(b0)};
}

std::pair<double, double> posterior(double alpha0, double beta0, const std::vector<int>& z) {
  int pos = 0;
  for (int v : z) pos += v ? 1 : 0;
  return {alpha0 + pos, beta0 + static_cast<double>(z.size()) - pos};
}

ConfidenceModel::ConfidenceModel(std::vector<double> alpha0, std::vector<double> beta0, double dt,
                                 ConfidenceParams params)
    : params_(params), dt_(dt), alpha0_(std::move(alpha0)), beta0_(std::move(beta0)) {
  params_.validate();
  if (alpha0_.size() != beta0_.size()) throw domain_error("confidence: prior size mismatch");
  n_obs_.assign(alpha0_.size(), 0);
  n_pos_.assign(alpha0_.size(), 0);
}

ConfidenceModel ConfidenceModel::from_variance(const std::vector<double>& sigma2, double dt,
                                               const ConfidenceParams& params) {
  auto [a0, b0] = prior_from_variance(sigma2, params);
  return ConfidenceModel(std::move(a0), std::move(b0), dt, params);
}

std::pair<double, double> ConfidenceModel::posterior_at(std::size_t t) const {
  return {alpha0_[t] + n_pos_[t], beta0_[t] + static_cast<double>(n_obs_[t] - n_pos_[t])};
}

bool ConfidenceModel::conf(std::size_t t) const {
  const auto [a, b] = posterior_at(t);
  return beta_cdf(params_.mu_c, a, b) > params_.gamma_c;
}

std::vector<std::uint8_t> ConfidenceModel::conf_mask() const {
  std::vector<std::uint8_t> mask(steps());
  for (std::size_t t = 0; t < steps(); ++t) mask[t] = conf(t) ? 1 : 0;
  return mask;
}

void ConfidenceModel::update_observations(const std::vector<std::pair<double, bool>>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].first < trace[k - 1].first) {
      throw trace_error("correction trace reference times are non-monotone");
    }
  }
  std::vector<std::uint8_t> touched(steps(), 0);
  std::vector<std::uint8_t> corrected(steps(), 0);
  for (const auto& [t, flag] : trace) {
    const long node = std::clamp(std::lround(t / dt_), 0l, static_cast<long>(steps()) - 1);
    touched[node] = 1;
    if (flag) corrected[node] = 1;
  }
  for (std::size_t k = 0; k < steps(); ++k) {
    if (!touched[k]) continue;
    ++n_obs_[k];
    n_pos_[k] += corrected[k];
  }
  ++n_e_;
}

std::string ConfidenceModel::to_json() const {
  nlohmann::json j;
  j["dt"] = dt_;
  j["n_e"] = n_e_;
  j["params"] = {{"gamma_p", params_.gamma_p},
                 {"sigma2_max", params_.sigma2_max},
                 {"mu_c", params_.mu_c},
                 {"gamma_c", params_.gamma_c},
                 {"epsilon", params_.epsilon}};
  j["alpha0"] = alpha0_;
  j["beta0"] = beta0_;
  j["n_obs"] = n_obs_;
  j["n_pos"] = n_pos_;
  return j.dump(2);
}

ConfidenceModel ConfidenceModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ConfidenceParams p;
  p.gamma_p = j["params"]["gamma_p"];
  p.sigma2_max = j["params"]["sigma2_max"];
  p.mu_c = j["params"]["mu_c"];
  p.gamma_c = j["params"]["gamma_c"];
  p.epsilon = j["params"]["epsilon"];
  ConfidenceModel m(j["alpha0"].get<std::vector<double>>(), j["beta0"].get<std::vector<double>>(),
                    j["dt"].get<double>(), p);
  m.n_obs_ = j["n_obs"].get<std::vector<int>>();
  m.n_pos_ = j["n_pos"].get<std::vector<int>>();
  m.n_e_ = j["n_e"].get<int>();
  return m;
}

}  // namespace coact

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coact/common.hpp"

namespace coact {

struct ConfidenceParams {
  double gamma_p = 20.0;
  double sigma2_max = 0.1;
  double mu_c = 0.5;
  double gamma_c = 0.9;
  double epsilon = 1e-6;

  void validate() const;
};

// Regularized incomplete beta I_x(a, b).
double beta_cdf(double x, double alpha, double beta);

// Variance-shaped Beta prior, per step (Eq. 10/11 parameterization).
std::pair<std::vector<double>, std::vector<double>> prior_from_variance(
    const std::vector<double>& sigma2, const ConfidenceParams& params);

// Posterior Beta parameters from a prior and Bernoulli observations.
std::pair<double, double> posterior(double alpha0, double beta0, const std::vector<int>& z);

// Per-step Beta prior plus the correction-observation ledger. Observations
// are appended one Boolean per execution per overlapped step.
class ConfidenceModel {
 public:
  ConfidenceModel() = default;
  ConfidenceModel(std::vector<double> alpha0, std::vector<double> beta0, double dt,
                  ConfidenceParams params);

  static ConfidenceModel from_variance(const std::vector<double>& sigma2, double dt,
                                       const ConfidenceParams& params);

  std::size_t steps() const { return alpha0_.size(); }
  double dt() const { return dt_; }
  int executions() const { return n_e_; }
  const ConfidenceParams& params() const { return params_; }
  double alpha0(std::size_t t) const { return alpha0_[t]; }
  double beta0(std::size_t t) const { return beta0_[t]; }
  int observations(std::size_t t) const { return n_obs_[t]; }
  int positives(std::size_t t) const { return n_pos_[t]; }

  std::pair<double, double> posterior_at(std::size_t t) const;
  bool conf(std::size_t t) const;
  std::vector<std::uint8_t> conf_mask() const;

  // One past execution: (reference time, correction given) samples at
  // fractional reference times, mapped to the nearest step. A step gets a 1
  // if any overlapping sample was corrected; steps never reached get no
  // entry.
  void update_observations(const std::vector<std::pair<double, bool>>& trace);

  std::string to_json() const;
  static ConfidenceModel from_json(const std::string& text);

 private:
  ConfidenceParams params_;
  double dt_ = 0.2;
  std::vector<double> alpha0_;
  std::vector<double> beta0_;
  std::vector<int> n_obs_;
  std::vector<int> n_pos_;
  int n_e_ = 0;
};

}  // namespace coact

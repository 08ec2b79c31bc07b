// Acceptance harness: one [PASS]/[FAIL] line per criterion, nonzero exit on
// any failure. Criteria 1-3 and 9 share one desk-scale experiment run.
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "coact/experiment.hpp"

using namespace coact;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s (%s)\n", ok ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
  if (!ok) ++failures;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---- independent quadrature oracle for the Beta CDF ----
// Tanh-sinh rule: t = x / (1 + exp(-pi sinh u)) pushes both endpoint
// singularities into doubly-exponential tails so a plain trapezoid converges
// far below the comparison tolerance.

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double softplus(double z) { return z > 36.0 ? z : std::log1p(std::exp(z)); }

double quadrature_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > 0.5) return 1.0 - quadrature_cdf(1.0 - x, b, a);
  const double ln_b = lbeta(a, b);
  const double ln_x = std::log(x);
  const double h = 0.025;
  const double pi = 3.14159265358979323846;
  double sum = 0.0;
  for (int i = -200; i <= 200; ++i) {
    const double u = static_cast<double>(i) * h;
    const double s = pi * std::sinh(u);
    const double ln_w = -softplus(-s);
    const double ln_1w = -softplus(s);
    const double one_minus_t = (1.0 - x) + x * std::exp(ln_1w);
    const double lf = a * (ln_x + ln_w) + (b - 1.0) * std::log(one_minus_t) +
                      std::log(pi * std::cosh(u)) + ln_1w - ln_b;
    sum += std::exp(lf);
  }
  return sum * h;
}

// ---- shared helpers ----

Demonstration sample_signal(double duration, const TimeWarp* truth) {
  const double dt = 0.2;
  auto f = [](double t) {
    return std::vector<double>{std::sin(0.7 * t) + 0.3 * t, std::cos(0.5 * t),
                               0.2 * t + 0.1 * std::sin(1.3 * t)};
  };
  const double len = truth ? truth->length() : duration;
  const std::size_t n = static_cast<std::size_t>(std::llround(len / dt)) + 1;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::min(static_cast<double>(k) * dt, len);
    rows.push_back(f(truth ? truth->eval_inverse(s) : s));
  }
  return Demonstration(dt, rows);
}

// Exhaustive alignment oracle: dynamic program over the full slope-constrained
// move lattice {(1,1),(1,2),(2,1),(1,3),(3,1)}, scoring every visited cell with
// the same continuous-interpolation loss as warp_loss.
double oracle_loss(const Demonstration& ref, const Demonstration& tgt,
                   const std::vector<double>& w) {
  const double dt = 0.2;
  const std::size_t n = ref.size();
  const std::size_t m = tgt.size();
  const int moves[5][2] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}};
  auto cell = [&](std::size_t k, double jf) {
    const std::vector<double> x = tgt.state_at(jf * dt);
    double c = 0.0;
    for (std::size_t ch = 0; ch < w.size(); ++ch) {
      const double e = x[ch] - ref.sample(k)[ch];
      c += w[ch] * e * e;
    }
    return c * dt;
  };
  const double big = 1e100;
  std::vector<double> dp(n * m, big);
  dp[0] = cell(0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == 0 && j == 0) continue;
      double best = big;
      for (const auto& mv : moves) {
        const int a = mv[0];
        const int b = mv[1];
        if (static_cast<int>(i) < a || static_cast<int>(j) < b) continue;
        const double prev = dp[(i - a) * m + (j - b)];
        if (prev >= big) continue;
        double c = prev;
        for (int s = 1; s <= a; ++s) {
          c += cell(i - a + s, static_cast<double>(j) - b + static_cast<double>(s) * b / a);
        }
        best = std::min(best, c);
      }
      dp[i * m + j] = best;
    }
  }
  return dp[(n - 1) * m + (m - 1)];
}

ExperimentConfig margin_task_config(int variant) {
  ExperimentConfig ec = ExperimentConfig::defaults();
  ec.task.passes = 2 + variant % 2;
  ec.task.pass_duration = 4.0 + 0.5 * (variant % 3);
  ec.task.transition_duration = 2.0;
  ec.task.lead_duration = 1.0;
  ec.task.n_demos = 4 + variant % 2;
  ec.task.need_fraction = variant % 2 ? 0.3 : 0.5;
  ec.task.min_jitter = 0.7 + 0.02 * (variant % 3);
  ec.samples = 250;
  ec.iterations = 6;
  ec.seed = 1000 + static_cast<std::uint64_t>(variant);
  return ec;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;

  // ---- desk-scale experiment, shared by criteria 1, 2, 3 and 9 ----
  ExperimentConfig ec = ExperimentConfig::defaults();
  ec.seed = 7;
  ec.threads = 4;
  ec.out_dir = "/tmp/coact_acceptance_run1";
  const auto t0 = clock::now();
  const ExperimentResult run1 = run_experiment(ec, true);
  const double elapsed = std::chrono::duration<double>(clock::now() - t0).count();

  // 1: convergence trend
  {
    const std::size_t iters = run1.trials[0].records.size();
    std::vector<double> mean_t(iters, 0.0);
    for (const TrialResult& tr : run1.trials)
      for (std::size_t i = 0; i < iters; ++i) mean_t[i] += tr.records[i].scheduled_total;
    for (double& v : mean_t) v /= static_cast<double>(run1.trials.size());
    bool monotone = true;
    for (std::size_t i = 1; i < iters; ++i)
      if (mean_t[i] > mean_t[i - 1] + 1e-9) monotone = false;
    const double ratio = mean_t.back() / mean_t.front();
    std::ostringstream d;
    d << "final/initial " << format_g9(ratio) << ", monotone " << (monotone ? "yes" : "no")
      << ", runtime " << format_g9(elapsed) << " s";
    report(1, "convergence trend", ratio <= 0.65 && monotone && elapsed < 600.0, d.str());
  }

  // 2: confidence convergence per trial
  {
    bool ok = true;
    double worst = 0.0;
    for (const TrialResult& tr : run1.trials) {
      const double target = 1.0 - tr.ground_truth_need;
      const double err = std::abs(tr.records.back().highconf_frac - target);
      worst = std::max(worst, err);
      if (err > 0.05) ok = false;
    }
    report(2, "confidence convergence", ok,
           "max |final - ground truth| " + format_g9(worst) + " (limit 0.05)");
  }

  // 3: no simultaneous low confidence anywhere in the closed loop
  {
    long violations = 0;
    for (const TrialResult& tr : run1.trials)
      for (const IterationRecord& r : tr.records) violations += r.overlap_violations;
    long gantt_bad = 0;
    for (const std::string& csv : run1.trials[0].gantt_csv) {
      std::istringstream is(csv);
      std::string line;
      std::getline(is, line);  // header
      while (std::getline(is, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (line.substr(c1 + 1, c2 - c1 - 1) == "0" && line.substr(c2 + 1) == "0") ++gantt_bad;
      }
    }
    report(3, "alternating low-confidence ownership", violations == 0 && gantt_bad == 0,
           "simulated overlaps " + std::to_string(violations) + ", grid overlaps " +
               std::to_string(gantt_bad));
  }

  // 4: margin soundness against adversarial operator timing
  {
    std::atomic<long> violations{0};
    std::atomic<int> schedules{0};
    std::atomic<int> task_idx{0};
    const int n_tasks = 10;
    auto worker = [&]() {
      for (;;) {
        const int v = task_idx.fetch_add(1);
        if (v >= n_tasks) return;
        const ExperimentConfig mc = margin_task_config(v);
        TrialState state = init_trial(mc, Rng::derive(mc.seed, 500).next_u64());
        for (int iter = 0; iter < mc.iterations; ++iter) run_iteration(state, mc, 0, iter);
        for (int k = 0; k < 5; ++k) {
          OptimizerConfig oc;
          oc.samples = mc.samples;
          oc.rng_seed = Rng::derive(mc.seed, 9000 + static_cast<std::uint64_t>(k)).next_u64();
          const Schedule s =
              optimize_schedule(state.bounds, state.conf_mask, state.model.dt, oc);
          if (!check_constraints(s, state.bounds, state.conf_mask)) continue;
          ++schedules;
          for (int sim = 0; sim < 1000; ++sim) {
            OperatorModel op;
            op.need = state.need.need;
            if (sim < 2) {
              op.mode = OperatorModel::TimingMode::WorstCase;
              op.worst_case_fast_agent = sim;
            } else {
              op.mode = OperatorModel::TimingMode::AdversarialRandom;
            }
            Rng rng(Rng::derive(mc.seed, 50000 + 1000ull * k + static_cast<std::uint64_t>(sim))
                        .next_u64());
            const SimulationResult res =
                simulate_execution(s, state.model, state.bounds, state.conf_mask, op, rng);
            violations += res.overlap_violations;
          }
        }
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < 4; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    report(4, "margin soundness under adversaries", violations == 0 && schedules >= 50,
           std::to_string(schedules.load()) + " schedules x 1000 runs, " +
               std::to_string(violations.load()) + " overlaps");
  }

  // 5: Bayesian machinery
  {
    Rng rng(55);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double x = rng.uniform(0.01, 0.99);
      const double a = rng.uniform(0.2, 30.0);
      const double b = rng.uniform(0.2, 30.0);
      worst = std::max(worst, std::abs(beta_cdf(x, a, b) - quadrature_cdf(x, a, b)));
    }
    const ConfidenceParams params;
    const auto [a0, b0] = prior_from_variance({0.0}, params);
    const bool prior_ok =
        std::abs(a0[0] - 4.0e-5) / 4.0e-5 <= 1e-3 && std::abs(b0[0] - 4.0) / 4.0 <= 1e-3;
    ConfidenceModel sym({0.75}, {0.75}, 0.2, params);
    const bool sym_ok = !sym.conf(0);
    for (int e = 0; e < 20; ++e) sym.update_observations({{0.0, false}});
    const bool evid_ok = sym.conf(0);
    report(5, "Bayesian machinery", worst <= 1e-8 && prior_ok && sym_ok && evid_ok,
           "max cdf error " + format_g9(worst) + ", prior (" + format_g9(a0[0]) + ", " +
               format_g9(b0[0]) + ")");
  }

  // 6: warping
  {
    const Demonstration ref = sample_signal(10.0, nullptr);
    const std::vector<double> w = cartesian_alignment_weights(ref.channels());
    bool const_ok = true;
    double worst_g = 0.0;
    for (double g : {0.5, 1.0, 2.0}) {
      const TimeWarp truth = TimeWarp::constant(0.2, ref.size(), g);
      const Demonstration tgt = sample_signal(0.0, &truth);
      const TimeWarp rec = optimize_warp(ref, tgt, w);
      double mean = 0.0;
      for (std::size_t k = 0; k < rec.nodes(); ++k) mean += rec.gradient_at(k);
      mean /= static_cast<double>(rec.nodes());
      worst_g = std::max(worst_g, std::abs(mean - g) / g);
      if (std::abs(mean - g) / g > 0.05) const_ok = false;
    }

    Rng rng(66);
    bool oracle_ok = true;
    double worst_gap = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> g(ref.size());
      const double a = rng.uniform(0.2, 0.45);
      const double f = rng.uniform(0.3, 0.9);
      const double p = rng.uniform(0.0, 6.28);
      for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = 1.0 + a * std::sin(f * static_cast<double>(k) * 0.2 + p);
      const TimeWarp truth(0.2, g);
      const Demonstration tgt = sample_signal(0.0, &truth);
      const double opt = warp_loss(ref, tgt, w, optimize_warp(ref, tgt, w));
      const double oracle = oracle_loss(ref, tgt, w);
      const double gap = opt / std::max(oracle, 1e-12) - 1.0;
      worst_gap = std::max(worst_gap, gap);
      if (opt > 1.10 * oracle + 1e-9) oracle_ok = false;
    }

    bool inverse_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> g(60);
      const double a = rng.uniform(0.1, 0.6);
      const double f = rng.uniform(0.2, 1.5);
      const double p = rng.uniform(0.0, 6.28);
      for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = 1.0 + a * std::sin(f * static_cast<double>(k) * 0.2 + p);
      const TimeWarp wp(0.2, g);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = static_cast<double>(k) * 0.2;
        if (std::abs(wp.eval_inverse(wp.eval(t)) - t) > 0.2 + 1e-9) inverse_ok = false;
      }
    }
    report(6, "warp recovery, oracle gap, inverse composition",
           const_ok && oracle_ok && inverse_ok,
           "worst gradient error " + format_g9(worst_g) + ", worst oracle gap " +
               format_g9(worst_gap));
  }

  // 7: corrections safety sweep
  {
    ExperimentConfig sc = ExperimentConfig::defaults();
    sc.seed = 7;
    const TrialState state = init_trial(sc, Rng::derive(sc.seed, 500).next_u64());
    const std::size_t g = state.model.gradient_channel();
    bool in_bounds = true, mean_exact = true;
    for (std::size_t t = 0; t < state.model.steps(); ++t) {
      for (double u : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const auto x = apply_correction(state.model, t, u);
        if (x[g] < state.bounds.min_gradient[t] - 1e-9 ||
            x[g] > state.bounds.max_gradient[t] + 1e-9)
          in_bounds = false;
        if (u == 0.0)
          for (std::size_t c = 0; c < x.size(); ++c)
            if (x[c] != state.model.mean[t][c]) mean_exact = false;
      }
    }
    report(7, "corrections stay inside the gradient envelope", in_bounds && mean_exact,
           std::to_string(state.model.steps()) + " steps x 5 inputs");
  }

  // 8: timing strategy truth table and step laws
  {
    const double dt = 0.2;
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
    bool table = true;
    table = table && near(response_step(0.2, 2.0, 0.5, dt), 0.1);
    table = table && near(response_step(-0.15, 2.0, 0.5, dt), 0.15);
    table = table && near(response_step(-1.0, 2.0, 0.5, dt), 0.4);
    {
      const auto [da, db] = high_conf_step(0.0, 2.0, 2.0, 0.5, dt);
      table = table && near(da, 0.4) && near(db, 0.4);
    }
    {
      const auto [da, db] = high_conf_step(0.1, 1.0, 2.0, 0.5, dt);
      table = table && near(da, 0.2) && near(db, 0.3);
    }
    {
      const auto [da, db] = high_conf_step(1.0, 2.0, 2.0, 0.5, dt);
      table = table && near(da, 0.1) && near(db, 0.4);
    }
    WarpBounds b;
    b.min_gradient.assign(5, 0.5);
    b.mean_gradient.assign(5, 1.0);
    b.max_gradient.assign(5, 3.0);
    const SpeedFactors f6 = speed_factors(TimeWarp::constant(dt, 5, 3.0), b, 0.5);
    table = table && near(f6.fast, 6.0);
    const WarpBounds one{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
    const SpeedFactors f1 = speed_factors(TimeWarp::identity(dt, 2), one, 0.1);
    table = table && near(f1.fast, 1.0) && near(f1.slow, 1.0);

    Rng rng(88);
    bool laws = true;
    for (int i = 0; i < 100000; ++i) {
      const double S = rng.uniform(0.05, 1.0);
      const double F = rng.uniform(1.0, 8.0);
      const double d = response_step(rng.uniform(-3.0, 3.0), F, S, dt);
      if (d < S * dt - 1e-12 || d > F * dt + 1e-12) laws = false;
      const double Sa = rng.uniform(0.05, 1.0);
      const double Fa = rng.uniform(1.0, 8.0);
      const double Fb = rng.uniform(1.0, 8.0);
      const double gap = rng.uniform(0.0, 3.0);
      const auto [da, db] = high_conf_step(gap, Fa, Fb, Sa, dt);
      if (da < Sa * dt - 1e-12 || da > Fa * dt + 1e-12 || db > Fb * dt + 1e-12) laws = false;
      if (gap + da - db < -1e-12) laws = false;
    }
    report(8, "timing truth table and step laws", table && laws,
           table ? "9 branch cases exact, 100000 random states" : "branch case mismatch");
  }

  // 9: determinism
  {
    ExperimentConfig ec2 = ec;
    ec2.out_dir = "/tmp/coact_acceptance_run2";
    run_experiment(ec2, true);
    const std::string r1 = read_file("/tmp/coact_acceptance_run1/records.csv");
    const std::string r2 = read_file("/tmp/coact_acceptance_run2/records.csv");
    report(9, "byte-identical records.csv for equal seeds", !r1.empty() && r1 == r2,
           std::to_string(r1.size()) + " bytes each");
  }

  return failures == 0 ? 0 : 1;
}

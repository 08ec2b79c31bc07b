#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "coact/demo_io.hpp"
#include "coact/warp.hpp"

using namespace coact;

namespace {

constexpr double kDt = 0.2;

// Smooth closed-form 3-channel trajectory so alignments always have signal.
std::vector<double> signal(double t) {
  return {std::sin(0.7 * t) + 0.3 * t, std::cos(0.5 * t), 0.2 * t + 0.1 * std::sin(1.3 * t)};
}

Demonstration sample_signal(double duration, double time_scale) {
  const std::size_t n = static_cast<std::size_t>(std::llround(duration / kDt)) + 1;
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) rows.push_back(signal(static_cast<double>(k) * kDt * time_scale));
  return Demonstration(kDt, rows);
}

// Target built by replaying the signal through a smooth nonuniform warp:
// target timeline position s corresponds to reference time psi_inv(s).
Demonstration warped_signal(const TimeWarp& truth) {
  const double len = truth.length();
  const std::size_t n = static_cast<std::size_t>(std::llround(len / kDt)) + 1;
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::min(static_cast<double>(k) * kDt, len);
    rows.push_back(signal(truth.eval_inverse(s)));
  }
  return Demonstration(kDt, rows);
}

// Exhaustive alignment oracle: dynamic program over the full slope-constrained
// move lattice {(1,1),(1,2),(2,1),(1,3),(3,1)}, scoring every visited cell with
// the same continuous-interpolation loss as warp_loss.  Its value is the best
// discretized path cost achievable within the admissible gradient range.
double oracle_loss(const Demonstration& ref, const Demonstration& tgt,
                   const std::vector<double>& w) {
  const std::size_t n = ref.size();
  const std::size_t m = tgt.size();
  const int moves[5][2] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}};
  auto cell = [&](std::size_t k, double jf) {
    const std::vector<double> x = tgt.state_at(jf * kDt);
    const std::vector<double>& r = ref.sample(k);
    double c = 0.0;
    for (std::size_t ch = 0; ch < w.size(); ++ch) {
      const double e = x[ch] - r[ch];
      c += w[ch] * e * e;
    }
    return c * kDt;
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

}  // namespace

TEST_CASE("time warp construction and evaluation") {
  const TimeWarp w = TimeWarp::constant(kDt, 51, 2.0);
  CHECK(w.eval(0.0) == doctest::Approx(0.0));
  CHECK(w.eval(3.0) == doctest::Approx(6.0));
  CHECK(w.length() == doctest::Approx(20.0));
  CHECK(w.eval(99.0) == doctest::Approx(w.length()));
  CHECK(w.eval(-1.0) == doctest::Approx(0.0));
  CHECK(w.ref_duration() == doctest::Approx(10.0));

  CHECK_THROWS_AS(TimeWarp(kDt, {1.0}), domain_error);
  CHECK_THROWS_AS(TimeWarp(kDt, {1.0, -0.5}), domain_error);
  CHECK_THROWS_AS(TimeWarp(0.0, {1.0, 1.0}), domain_error);
}

TEST_CASE("warp inversion") {
  SUBCASE("identity inverts to identity") {
    const TimeWarp w = TimeWarp::identity(kDt, 51);
    const TimeWarp inv = w.inverse();
    for (std::size_t k = 0; k < inv.nodes(); ++k) CHECK(inv.gradient_at(k) == doctest::Approx(1.0));
  }
  SUBCASE("constant gradient 2 inverts to constant 0.5") {
    const TimeWarp w = TimeWarp::constant(kDt, 51, 2.0);
    const TimeWarp inv = w.inverse();
    CHECK(inv.ref_duration() == doctest::Approx(20.0));
    CHECK(inv.length() == doctest::Approx(10.0).epsilon(0.01));
    for (std::size_t k = 0; k + 1 < inv.nodes(); ++k)
      CHECK(inv.gradient_at(k) == doctest::Approx(0.5).epsilon(0.01));
  }
  SUBCASE("composition with the inverse stays within one sample") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> g(60);
      const double a = rng.uniform(0.1, 0.6);
      const double f = rng.uniform(0.2, 1.5);
      const double p = rng.uniform(0.0, 6.28);
      for (std::size_t k = 0; k < g.size(); ++k)
        g[k] = 1.0 + a * std::sin(f * static_cast<double>(k) * kDt + p);
      const TimeWarp w(kDt, g);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = static_cast<double>(k) * kDt;
        CHECK(std::abs(w.eval_inverse(w.eval(t)) - t) <= kDt + 1e-9);
      }
    }
  }
}

TEST_CASE("gradient bounds over demonstration warps") {
  const std::size_t nodes = 11;
  SUBCASE("pointwise min mean max") {
    const std::vector<TimeWarp> warps = {TimeWarp::constant(kDt, nodes, 0.5),
                                         TimeWarp::constant(kDt, nodes, 1.0),
                                         TimeWarp::constant(kDt, nodes, 2.0)};
    const WarpBounds b = gradient_bounds(warps);
    REQUIRE(b.nodes() == nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      CHECK(b.min_gradient[k] == doctest::Approx(0.5));
      CHECK(b.max_gradient[k] == doctest::Approx(2.0));
      CHECK(b.mean_gradient[k] == doctest::Approx(3.5 / 3.0));
    }
  }
  SUBCASE("all identity warps") {
    const std::vector<TimeWarp> warps(3, TimeWarp::identity(kDt, nodes));
    const WarpBounds b = gradient_bounds(warps);
    for (std::size_t k = 0; k < nodes; ++k) {
      CHECK(b.min_gradient[k] == 1.0);
      CHECK(b.mean_gradient[k] == 1.0);
      CHECK(b.max_gradient[k] == 1.0);
    }
  }
  SUBCASE("single warp rejected") {
    CHECK_THROWS_AS(gradient_bounds({TimeWarp::identity(kDt, nodes)}), domain_error);
  }
  SUBCASE("length mismatch rejected") {
    CHECK_THROWS_AS(gradient_bounds({TimeWarp::identity(kDt, 11), TimeWarp::identity(kDt, 12)}),
                    domain_error);
  }
}

TEST_CASE("warp optimization recovers constant gradients") {
  const Demonstration ref = sample_signal(10.0, 1.0);
  const std::vector<double> w = cartesian_alignment_weights(ref.channels());
  for (double g : {0.5, 1.0, 2.0}) {
    const TimeWarp truth = TimeWarp::constant(kDt, ref.size(), g);
    const Demonstration tgt = warped_signal(truth);
    const TimeWarp rec = optimize_warp(ref, tgt, w);
    REQUIRE(rec.nodes() == ref.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < rec.nodes(); ++k) mean += rec.gradient_at(k);
    mean /= static_cast<double>(rec.nodes());
    CHECK(mean == doctest::Approx(g).epsilon(0.05));
    for (std::size_t k = 3; k + 3 < rec.nodes(); ++k)
      CHECK(rec.gradient_at(k) == doctest::Approx(g).epsilon(0.05));
  }
}

TEST_CASE("warp optimization identity and monotonicity") {
  const Demonstration ref = sample_signal(10.0, 1.0);
  const std::vector<double> w = cartesian_alignment_weights(ref.channels());
  const TimeWarp rec = optimize_warp(ref, ref, w);
  for (std::size_t k = 0; k < rec.nodes(); ++k)
    CHECK(rec.gradient_at(k) == doctest::Approx(1.0).epsilon(0.05));
  for (std::size_t k = 0; k + 1 < rec.nodes(); ++k) {
    const double t0 = static_cast<double>(k) * kDt;
    CHECK(rec.eval(t0) < rec.eval(t0 + kDt));
  }
  CHECK(rec.eval(0.0) == doctest::Approx(0.0));
  CHECK(std::abs(rec.length() - ref.duration()) <= kDt);
}

TEST_CASE("warp optimization near the alignment oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Demonstration ref = sample_signal(9.8, 1.0);
    std::vector<double> g(ref.size());
    const double a = rng.uniform(0.2, 0.45);
    const double f = rng.uniform(0.3, 0.9);
    const double p = rng.uniform(0.0, 6.28);
    for (std::size_t k = 0; k < g.size(); ++k)
      g[k] = 1.0 + a * std::sin(f * static_cast<double>(k) * kDt + p);
    const TimeWarp truth(kDt, g);
    const Demonstration tgt = warped_signal(truth);
    const std::vector<double> w = cartesian_alignment_weights(ref.channels());

    const TimeWarp rec = optimize_warp(ref, tgt, w);
    const double opt = warp_loss(ref, tgt, w, rec);
    const double oracle = oracle_loss(ref, tgt, w);
    CHECK(opt <= 1.10 * oracle + 1e-9);
  }
}

TEST_CASE("warp optimization infeasible length ratio") {
  const Demonstration ref = sample_signal(10.0, 1.0);
  const Demonstration tgt = sample_signal(0.6, 1.0);
  const std::vector<double> w = cartesian_alignment_weights(ref.channels());
  CHECK_THROWS_AS(optimize_warp(ref, tgt, w), infeasibility_error);
}

TEST_CASE("cartesian alignment weights") {
  const std::vector<double> w = cartesian_alignment_weights(11);
  REQUIRE(w.size() == 11);
  CHECK(w[0] > 0.0);
  CHECK(w[0] == w[1]);
  CHECK(w[1] == w[2]);
  for (std::size_t c = 3; c < w.size(); ++c) CHECK(w[c] == 0.0);
}

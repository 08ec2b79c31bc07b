#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coact {

// Error categories for the library's failure paths. Everything derives from
// std::runtime_error so callers can catch coarsely.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct schema_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct infeasibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct trace_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct divergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG (splitmix64). Independent streams are derived from a
// base seed plus a stream index so parallel workers reproduce the serial
// result bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ull) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed);
    r.state_ ^= 0xbf58476d1ce4e5b9ull * (stream + 1);
    r.next_u64();
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

inline void normalize_quaternion(std::vector<double>& v, int offset) {
  if (offset < 0) return;
  double n2 = 0.0;
  for (int c = offset; c < offset + 4; ++c) n2 += v[c] * v[c];
  if (n2 <= 0.0) throw domain_error("quaternion has zero norm");
  const double inv = 1.0 / std::sqrt(n2);
  for (int c = offset; c < offset + 4; ++c) v[c] *= inv;
}

inline double lerp(double a, double b, double s) { return a + (b - a) * s; }

// Fixed-format numeric printing, 9 significant digits, used by every file
// writer so reruns diff cleanly.
std::string format_g9(double v);
std::string format_full(double v);  // round-trip exact (%.17g)

}  // namespace coact

#include "coact/demo_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "coact/warp.hpp"

namespace coact {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

Demonstration finalize_demo(const std::vector<double>& times,
                            const std::vector<std::vector<double>>& rows, double dt,
                            const ChannelSchema& schema, std::size_t first_row) {
  if (rows.size() < 2) {
    throw parse_error("demonstration block starting at row " + std::to_string(first_row) +
                      " has fewer than 2 samples");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw parse_error("timestamps not strictly increasing at row " +
                        std::to_string(first_row + k));
    }
  }
  const double t0 = times.front();
  bool uniform = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs((times[k] - t0) - static_cast<double>(k) * dt) > 1e-9) {
      uniform = false;
      break;
    }
  }
  std::vector<std::vector<double>> samples;
  if (uniform) {
    samples = rows;
  } else {
    const double duration = times.back() - t0;
    const std::size_t n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
    samples.resize(std::max<std::size_t>(n, 2));
    std::size_t seg = 0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double t = t0 + std::min(static_cast<double>(k) * dt, duration);
      while (seg + 2 < times.size() && times[seg + 1] < t) ++seg;
      const double span = times[seg + 1] - times[seg];
      const double s = std::clamp((t - times[seg]) / span, 0.0, 1.0);
      samples[k].resize(rows[seg].size());
      for (std::size_t c = 0; c < samples[k].size(); ++c) {
        samples[k][c] = lerp(rows[seg][c], rows[seg + 1][c], s);
      }
    }
  }
  Demonstration demo(dt, std::move(samples));
  demo.normalize_quaternions(schema.quat_offset);
  return demo;
}

}  // namespace

DemonstrationSet load_demonstrations(const std::string& path, const ChannelSchema& schema,
                                     double dt) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open demonstration file: " + path);

  const std::size_t m = schema.channels();
  std::string line;
  std::size_t row_index = 0;

  // Header row.
  if (!std::getline(in, line)) throw parse_error("empty demonstration file: " + path);
  ++row_index;
  const auto header = split_csv(line);
  if (header.size() != m + 1) {
    throw schema_error("header declares " + std::to_string(header.size() ? header.size() - 1 : 0) +
                       " channels, schema expects " + std::to_string(m));
  }

  DemonstrationSet set;
  set.schema = schema;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::size_t block_start = row_index + 1;

  auto flush = [&]() {
    if (rows.empty()) return;
    set.demos.push_back(finalize_demo(times, rows, dt, schema, block_start));
    times.clear();
    rows.clear();
  };

  while (std::getline(in, line)) {
    ++row_index;
    if (is_blank(line)) {
      flush();
      block_start = row_index + 1;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != m + 1) {
      throw schema_error("row " + std::to_string(row_index) + " has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(m + 1));
    }
    std::vector<double> values(m);
    double t = 0.0;
    try {
      std::size_t pos = 0;
      t = std::stod(fields[0], &pos);
      for (std::size_t c = 0; c < m; ++c) values[c] = std::stod(fields[c + 1], &pos);
    } catch (const std::exception&) {
      throw parse_error("malformed row " + std::to_string(row_index) + " in " + path);
    }
    times.push_back(t);
    rows.push_back(std::move(values));
  }
  flush();

  if (set.demos.size() < 2) {
    throw domain_error("insufficient demonstrations in " + path + ": found " +
                       std::to_string(set.demos.size()) + ", need at least 2");
  }
  set.validate();
  return set;
}

void save_demonstrations(const DemonstrationSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write demonstration file: " + path);
  out << "t";
  for (const auto& name : set.schema.names) out << "," << name;
  out << "\n";
  for (std::size_t d = 0; d < set.demos.size(); ++d) {
    if (d > 0) out << "\n";
    const auto& demo = set.demos[d];
    for (std::size_t k = 0; k < demo.size(); ++k) {
      out << format_full(static_cast<double>(k) * demo.dt());
      for (double v : demo.sample(k)) out << "," << format_full(v);
      out << "\n";
    }
  }
}

ChannelWeights weights_from_ranges(const std::vector<double>& ranges) {
  ChannelWeights cw;
  cw.ranges = ranges;
  cw.weights.reserve(ranges.size());
  for (double r : ranges) {
    if (!(r > 0.0)) throw domain_error("channel range must be positive");
    cw.weights.push_back(1.0 / (r * r));
  }
  return cw;
}

double SynthTaskSpec::nominal_duration() const {
  return 2.0 * lead_duration + passes * pass_duration +
         (passes - 1) * transition_duration;
}

void SynthTaskSpec::validate() const {
  if (passes < 1) throw config_error("synth task: passes must be >= 1");
  if (pass_duration <= 0.0 || transition_duration < 0.0 || lead_duration < 0.0 || dt <= 0.0) {
    throw config_error("synth task: durations must be positive");
  }
  if (need_fraction < 0.0 || need_fraction > 1.0) {
    throw config_error("synth task: need_fraction must be in [0, 1]");
  }
  if (n_demos < 2) throw config_error("synth task: need at least 2 demonstrations");
  if (!(min_jitter > 0.0)) {
    throw config_error("synth task: jitter bounds must stay above zero gradient");
  }
  if (min_jitter > 1.0 + 1e-12 || max_jitter < 1.0 - 1e-12 || min_jitter > max_jitter) {
    throw config_error("synth task: jitter bounds must bracket 1");
  }
  if (sections_per_pass < 1) throw config_error("synth task: sections_per_pass must be >= 1");
  if (need_slowdown < 1.0) throw config_error("synth task: need_slowdown must be >= 1");
}

double GroundTruthNeed::need_fraction() const {
  if (need.empty()) return 0.0;
  std::size_t c = 0;
  for (auto v : need) c += v ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(need.size());
}

namespace {

enum class SegKind { Lead, Pass, Transition, Tail };

struct Segment {
  SegKind kind;
  int pass = -1;  // pass index for Pass, preceding pass for Transition
  double start = 0.0;
  double end = 0.0;
};

std::vector<Segment> task_segments(const SynthTaskSpec& spec) {
  std::vector<Segment> segs;
  double t = 0.0;
  segs.push_back({SegKind::Lead, -1, t, t + spec.lead_duration});
  t += spec.lead_duration;
  for (int p = 0; p < spec.passes; ++p) {
    segs.push_back({SegKind::Pass, p, t, t + spec.pass_duration});
    t += spec.pass_duration;
    if (p + 1 < spec.passes) {
      segs.push_back({SegKind::Transition, p, t, t + spec.transition_duration});
      t += spec.transition_duration;
    }
  }
  segs.push_back({SegKind::Tail, -1, t, t + spec.lead_duration});
  return segs;
}

// Nominal trajectory at reference time t: every channel keeps moving so the
// alignment always has signal.
void nominal_state(const SynthTaskSpec& spec, const std::vector<Segment>& segs, double t,
                   std::vector<double>& out) {
  const Segment* seg = &segs.back();
  for (const auto& s : segs) {
    if (t < s.end || &s == &segs.back()) {
      seg = &s;
      break;
    }
  }
  const double span = std::max(seg->end - seg->start, 1e-9);
  const double s = std::clamp((t - seg->start) / span, 0.0, 1.0);
  double x = 0.0, y = 0.0, valve = 0.0;
  switch (seg->kind) {
    case SegKind::Lead:
      x = -0.3 + 0.3 * s;
      y = 0.0;
      break;
    case SegKind::Pass:
      x = s;
      y = 0.25 * seg->pass;
      valve = 1.0;
      break;
    case SegKind::Transition:
      x = 1.0 - s;
      y = 0.25 * (seg->pass + s);
      break;
    case SegKind::Tail:
      x = 1.0 + 0.3 * s;
      y = 0.25 * (spec.passes - 1);
      break;
  }
  out.assign(11, 0.0);
  out[0] = x;
  out[1] = y;
  out[2] = 0.0;
  out[6] = 1.0;  // identity quaternion
  out[10] = valve;
}

}  // namespace

std::pair<DemonstrationSet, GroundTruthNeed> synthesize_task(const SynthTaskSpec& spec,
                                                             std::uint64_t rng_seed) {
  spec.validate();
  const auto segs = task_segments(spec);
  const double duration = spec.nominal_duration();
  const std::size_t n = static_cast<std::size_t>(std::llround(duration / spec.dt)) + 1;

  Rng need_rng = Rng::derive(rng_seed, 0);

  // Correction-needing sections: every pass but the last gets
  // sections_per_pass disjoint chunks totaling need_fraction of its nodes.
  GroundTruthNeed truth;
  truth.dt = spec.dt;
  truth.need.assign(n, 0);
  for (const auto& seg : segs) {
    if (seg.kind != SegKind::Pass) continue;
    const bool last_pass = seg.pass == spec.passes - 1;
    if (last_pass) continue;
    const std::size_t lo = static_cast<std::size_t>(std::llround(seg.start / spec.dt));
    const std::size_t hi = static_cast<std::size_t>(std::llround(seg.end / spec.dt));
    const std::size_t pass_nodes = hi - lo;
    const std::size_t need_total =
        static_cast<std::size_t>(std::llround(spec.need_fraction * pass_nodes));
    const int k = spec.sections_per_pass;
    std::vector<std::size_t> chunk(k, need_total / k);
    for (std::size_t r = 0; r < need_total % k; ++r) ++chunk[r];
    // Random gap layout: distribute the free nodes over k+1 gaps.
    const std::size_t free_nodes = pass_nodes - need_total;
    std::vector<double> gw(k + 1);
    double gw_sum = 0.0;
    for (auto& g : gw) {
      g = need_rng.uniform() + 0.05;
      gw_sum += g;
    }
    std::size_t pos = lo;
    std::size_t used_free = 0;
    double acc = 0.0;
    for (int c = 0; c < k; ++c) {
      acc += gw[c];
      const std::size_t gap =
          static_cast<std::size_t>(std::floor(acc / gw_sum * free_nodes)) - used_free;
      used_free += gap;
      pos += gap;
      for (std::size_t q = 0; q < chunk[c] && pos < hi; ++q, ++pos) truth.need[pos] = 1;
    }
  }

  auto need_at = [&](double t) {
    const long node = std::clamp(std::lround(t / spec.dt), 0l, static_cast<long>(n) - 1);
    return truth.need[static_cast<std::size_t>(node)] != 0;
  };

  // The last pass carries no injected state variability; fade the noise out
  // over the transition leading into it and keep it off afterwards.
  double last_pass_start = duration;
  for (const auto& seg : segs) {
    if (seg.kind == SegKind::Pass && seg.pass == spec.passes - 1) last_pass_start = seg.start;
  }
  const double fade = std::max(std::min(spec.transition_duration, 2.0), spec.dt);
  auto noise_envelope = [&](double t) {
    return std::clamp((last_pass_start - t) / fade, 0.0, 1.0);
  };

  const double span = spec.max_jitter - spec.min_jitter;
  DemonstrationSet set;
  set.schema = ChannelSchema::standard();

  for (int d = 0; d < spec.n_demos; ++d) {
    Rng rng = Rng::derive(rng_seed, 100 + static_cast<std::uint64_t>(d));
    // Smooth per-demo timing field; demo 0 is the un-jittered reference.
    double center = 1.0, amp = 0.0, freq = 0.1, phase = 0.0, slow = 1.0;
    double nf1 = 0.1, nf2 = 0.23, np1 = 0.0, np2 = 0.0;
    if (d > 0 && span > 0.0) {
      center = rng.uniform(spec.min_jitter + 0.1 * span, spec.max_jitter - 0.1 * span);
      amp = rng.uniform(0.25 * span, 0.5 * span);
      freq = rng.uniform(0.02, 0.08);
      phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      slow = rng.uniform(1.0 + 0.25 * (spec.need_slowdown - 1.0), spec.need_slowdown);
    }
    double qa1 = 0.0, qa2 = 0.0, qf1 = 0.05, qf2 = 0.07, qp1 = 0.0, qp2 = 0.0;
    if (d > 0) {
      np1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      np2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      nf1 = rng.uniform(0.05, 0.15);
      nf2 = rng.uniform(0.15, 0.35);
      // Tool-orientation wobble, independent per demo.
      qa1 = rng.uniform(0.15, 0.3);
      qa2 = rng.uniform(0.15, 0.3);
      qf1 = rng.uniform(0.03, 0.09);
      qf2 = rng.uniform(0.03, 0.09);
      qp1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      qp2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }

    std::vector<double> grad(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * spec.dt;
      double g = center + amp * std::sin(2.0 * std::numbers::pi * freq * t + phase);
      if (truth.need[k]) g *= slow;
      grad[k] = std::clamp(g, spec.min_jitter, spec.max_jitter);
    }
    TimeWarp warp(spec.dt, grad);

    auto force_noise = [&](double t, double shift) {
      if (d == 0) return 0.0;
      return spec.force_noise *
             (0.6 * std::sin(2.0 * std::numbers::pi * nf1 * t + np1 + shift) +
              0.4 * std::sin(2.0 * std::numbers::pi * nf2 * t + np2 + 1.7 * shift));
    };

    const double demo_len = warp.length();
    const std::size_t demo_n =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(demo_len / spec.dt + 1e-9)) + 1);
    std::vector<std::vector<double>> samples(demo_n);
    std::vector<double> state;
    for (std::size_t k = 0; k < demo_n; ++k) {
      const double s = std::min(static_cast<double>(k) * spec.dt, demo_len);
      const double r = warp.eval_inverse(s);
      nominal_state(spec, segs, r, state);
      // Force profile: light touch off paint, firm on painted sections. The
      // last pass is consistently painted with no injected variability.
      const Segment* seg = nullptr;
      for (const auto& sg : segs) {
        if (r < sg.end || &sg == &segs.back()) {
          seg = &sg;
          break;
        }
      }
      const double env = noise_envelope(r);
      if (d > 0 && env > 0.0) {
        const double qx = env * qa1 * std::sin(2.0 * std::numbers::pi * qf1 * r + qp1);
        const double qz = env * qa2 * std::sin(2.0 * std::numbers::pi * qf2 * r + qp2);
        state[3] = qx;
        state[5] = qz;
        state[6] = std::sqrt(std::max(1.0 - qx * qx - qz * qz, 0.0));
      }
      const bool last_pass = seg->kind == SegKind::Pass && seg->pass == spec.passes - 1;
      double fz = spec.force_base;
      if (seg->kind == SegKind::Pass) {
        if (last_pass) {
          fz = spec.force_need;
        } else if (need_at(r)) {
          fz = spec.force_need + force_noise(r, 0.0);
        }
      }
      // Contact chatter everywhere except the consistently painted last pass.
      fz += env * 0.4 * force_noise(r, 0.9);
      state[7] = env * 0.3 * force_noise(r, 2.1);
      state[8] = env * 0.3 * force_noise(r, 4.4);
      state[9] = fz;
      samples[k] = state;
    }
    set.demos.emplace_back(spec.dt, std::move(samples));
  }

  set.validate();
  return {std::move(set), std::move(truth)};
}

}  // namespace coact

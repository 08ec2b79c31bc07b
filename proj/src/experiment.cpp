#include "coact/experiment.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace coact {

namespace {

const char* kRangeKeys[] = {"x",  "y",  "z",  "qx",    "qy",     "qz",
                            "qw", "fx", "fy", "fz", "valve", "psi_dot"};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng::derive(seed, stream).next_u64();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write output file: " + path.string());
  out << text;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.ranges = {2, 2, 2, 1, 1, 1, 1, 30, 30, 30, 1, 1};
  return c;
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  ExperimentConfig c = defaults();
  c.trials = static_cast<int>(cfg.get_int("experiment.trials", c.trials));
  c.iterations = static_cast<int>(cfg.get_int("experiment.iterations", c.iterations));
  c.samples = static_cast<int>(cfg.get_int("experiment.samples", c.samples));
  c.error_rate = cfg.get_double("experiment.error_rate", c.error_rate);
  c.fast_bias = cfg.get_double("experiment.fast_bias", c.fast_bias);
  c.seed = cfg.get_uint64("experiment.seed", c.seed);
  c.out_dir = cfg.get_string("experiment.out_dir", c.out_dir);
  c.threads = static_cast<int>(cfg.get_int("experiment.threads", c.threads));
  c.pca_window = static_cast<int>(cfg.get_int("experiment.pca_window", c.pca_window));

  c.confidence.gamma_p = cfg.get_double("confidence.gamma_p", c.confidence.gamma_p);
  c.confidence.sigma2_max = cfg.get_double("confidence.sigma2_max", c.confidence.sigma2_max);
  c.confidence.mu_c = cfg.get_double("confidence.mu_c", c.confidence.mu_c);
  c.confidence.gamma_c = cfg.get_double("confidence.gamma_c", c.confidence.gamma_c);
  c.confidence.epsilon = cfg.get_double("confidence.epsilon", c.confidence.epsilon);

  c.task.passes = static_cast<int>(cfg.get_int("task.passes", c.task.passes));
  c.task.pass_duration = cfg.get_double("task.pass_duration", c.task.pass_duration);
  c.task.transition_duration =
      cfg.get_double("task.transition_duration", c.task.transition_duration);
  c.task.lead_duration = cfg.get_double("task.lead_duration", c.task.lead_duration);
  c.task.need_fraction = cfg.get_double("task.need_fraction", c.task.need_fraction);
  c.task.sections_per_pass =
      static_cast<int>(cfg.get_int("task.sections_per_pass", c.task.sections_per_pass));
  c.task.n_demos = static_cast<int>(cfg.get_int("task.n_demos", c.task.n_demos));
  c.task.min_jitter = cfg.get_double("task.min_jitter", c.task.min_jitter);
  c.task.max_jitter = cfg.get_double("task.max_jitter", c.task.max_jitter);
  c.task.dt = cfg.get_double("task.dt_s", c.task.dt);
  c.task.force_base = cfg.get_double("task.force_base", c.task.force_base);
  c.task.force_need = cfg.get_double("task.force_need", c.task.force_need);
  c.task.force_noise = cfg.get_double("task.force_noise", c.task.force_noise);
  c.task.need_slowdown = cfg.get_double("task.need_slowdown", c.task.need_slowdown);

  for (std::size_t i = 0; i < c.ranges.size(); ++i)
    c.ranges[i] = cfg.get_double(std::string("ranges.") + kRangeKeys[i], c.ranges[i]);

  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (trials < 1 || iterations < 1 || samples < 1 || threads < 1 || pca_window < 1)
    throw config_error("experiment counts must be at least 1");
  if (error_rate < 0.0 || error_rate > 1.0) throw config_error("error_rate outside [0, 1]");
  if (fast_bias < 0.0 || fast_bias > 1.0) throw config_error("fast_bias outside [0, 1]");
  confidence.validate();
  task.validate();
  if (ranges.size() != 12) throw config_error("expected 12 channel ranges");
  for (double r : ranges)
    if (r <= 0.0) throw config_error("channel ranges must be positive");
}

TrialState init_trial(const ExperimentConfig& config, std::uint64_t trial_seed) {
  TrialState state;
  auto [set, need] = synthesize_task(config.task, trial_seed);
  state.demos = std::move(set);
  state.need = std::move(need);
  state.n_original = state.demos.size();
  state.weights_plus = weights_from_ranges(config.ranges);

  const std::size_t m = state.demos.channels();
  const Demonstration& ref = state.demos.reference();
  const std::vector<double> align_w = cartesian_alignment_weights(m);
  state.warps.push_back(TimeWarp::identity(ref.dt(), ref.size()));
  for (std::size_t d = 1; d < state.demos.size(); ++d)
    state.warps.push_back(optimize_warp(ref, state.demos.demos[d], align_w));

  state.bounds = gradient_bounds(state.warps);
  state.model = build_behavior_model(state.demos, state.warps, state.bounds, state.weights_plus,
                                     config.pca_window);
  state.confidence =
      ConfidenceModel::from_variance(state.model.variance, config.task.dt, config.confidence);
  state.conf_mask = state.confidence.conf_mask();
  return state;
}

IterationRecord run_iteration(TrialState& state, const ExperimentConfig& config, int trial,
                              int iteration) {
  try {
    const double dt = state.model.dt;
    const std::uint64_t base = 1'000'000ull * static_cast<std::uint64_t>(trial + 1) +
                               10ull * static_cast<std::uint64_t>(iteration);

    OptimizerConfig oc;
    oc.samples = config.samples;
    oc.rng_seed = stream_seed(config.seed, base + 1);
    oc.fast_bias = config.fast_bias;
    oc.threads = 1;
    Schedule schedule = optimize_schedule(state.bounds, state.conf_mask, dt, oc,
                                          state.has_schedule ? &state.schedule : nullptr);

    OperatorModel op;
    op.need = state.need.need;
    op.error_rate = config.error_rate;
    Rng sim_rng(stream_seed(config.seed, base + 2));
    SimulationResult sim =
        simulate_execution(schedule, state.model, state.bounds, state.conf_mask, op, sim_rng);

    const std::vector<double> align_w = cartesian_alignment_weights(state.demos.channels());
    for (int agent = 0; agent < 2; ++agent) {
      const ExecutionTrace& trace = sim.traces[agent];
      state.confidence.update_observations(trace.correction_trace());
      Demonstration executed = trace.to_demonstration(dt);
      state.warps.push_back(optimize_warp(state.demos.reference(), executed, align_w));
      state.demos.demos.push_back(std::move(executed));
    }
    state.model.mean = build_mean(state.demos, state.warps, state.bounds);

    // Confidence latches: once a step clears the threshold it is scheduled
    // as high-confidence from then on.
    const std::vector<std::uint8_t> fresh = state.confidence.conf_mask();
    for (std::size_t k = 0; k < state.conf_mask.size(); ++k)
      if (fresh[k]) state.conf_mask[k] = 1;

    state.schedule = schedule;
    state.has_schedule = true;

    IterationRecord rec;
    rec.iteration = iteration;
    rec.scheduled_total = schedule.total_time();
    rec.realized_total = sim.realized_total;
    std::size_t confident = 0;
    for (std::uint8_t v : state.conf_mask) confident += v;
    rec.highconf_frac = static_cast<double>(confident) / static_cast<double>(state.conf_mask.size());
    rec.corrections = sim.corrections[0] + sim.corrections[1];
    rec.overlap_violations = sim.overlap_violations;
    return rec;
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("trial " + std::to_string(trial) + " iteration " +
                             std::to_string(iteration) + ": " + e.what());
  }
}

std::string ExperimentResult::records_csv() const {
  std::ostringstream os;
  os << "trial,iteration,scheduled_T,realized_T,highconf_frac,corrections\n";
  for (const TrialResult& tr : trials)
    for (const IterationRecord& rec : tr.records)
      os << tr.trial << ',' << rec.iteration << ',' << format_g9(rec.scheduled_total) << ','
         << format_g9(rec.realized_total) << ',' << format_g9(rec.highconf_frac) << ','
         << rec.corrections << '\n';
  return os.str();
}

std::string ExperimentResult::summary_json() const {
  nlohmann::ordered_json j;
  const std::size_t n_iter = trials.empty() ? 0 : trials.front().records.size();
  nlohmann::ordered_json mean_t = nlohmann::ordered_json::array();
  nlohmann::ordered_json std_t = nlohmann::ordered_json::array();
  nlohmann::ordered_json mean_conf = nlohmann::ordered_json::array();
  nlohmann::ordered_json std_conf = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < n_iter; ++k) {
    double mt = 0.0, mc = 0.0;
    for (const TrialResult& tr : trials) {
      mt += tr.records[k].scheduled_total;
      mc += tr.records[k].highconf_frac;
    }
    mt /= static_cast<double>(trials.size());
    mc /= static_cast<double>(trials.size());
    double vt = 0.0, vc = 0.0;
    for (const TrialResult& tr : trials) {
      vt += (tr.records[k].scheduled_total - mt) * (tr.records[k].scheduled_total - mt);
      vc += (tr.records[k].highconf_frac - mc) * (tr.records[k].highconf_frac - mc);
    }
    const double denom = trials.size() > 1 ? static_cast<double>(trials.size() - 1) : 1.0;
    mean_t.push_back(mt);
    std_t.push_back(std::sqrt(vt / denom));
    mean_conf.push_back(mc);
    std_conf.push_back(std::sqrt(vc / denom));
  }
  j["iterations"] = n_iter;
  j["trials"] = trials.size();
  j["mean_scheduled_T"] = mean_t;
  j["std_scheduled_T"] = std_t;
  j["mean_highconf_frac"] = mean_conf;
  j["std_highconf_frac"] = std_conf;
  nlohmann::ordered_json gt = nlohmann::ordered_json::array();
  int violations = 0;
  for (const TrialResult& tr : trials) {
    gt.push_back(1.0 - tr.ground_truth_need);
    for (const IterationRecord& rec : tr.records) violations += rec.overlap_violations;
  }
  j["ground_truth_highconf_frac"] = gt;
  j["overlap_violations"] = violations;
  if (n_iter > 0 && !mean_t.empty())
    j["final_over_initial_scheduled_T"] = mean_t.back().get<double>() / mean_t.front().get<double>();
  return j.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs) {
  config.validate();
  ExperimentResult result;
  result.trials.resize(config.trials);

  auto run_trial = [&](int trial) {
    TrialResult tr;
    tr.trial = trial;
    TrialState state = init_trial(config, stream_seed(config.seed, 500 + trial));
    tr.ground_truth_need = state.need.need_fraction();
    for (int it = 0; it < config.iterations; ++it) {
      tr.records.push_back(run_iteration(state, config, trial, it));
      if (trial == 0) {
        tr.schedule_json.push_back(state.schedule.to_json(true, state.schedule.total_time()));
        tr.gantt_csv.push_back(schedule_gantt_csv(state.schedule, state.conf_mask));
      }
    }
    result.trials[trial] = std::move(tr);
  };

  const int workers = std::min(config.threads, config.trials);
  if (workers <= 1) {
    for (int t = 0; t < config.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < config.trials; t = next.fetch_add(1)) {
          try {
            run_trial(t);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  if (write_outputs) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "records.csv", result.records_csv());
    write_file(dir / "summary.json", result.summary_json());
    if (!result.trials.empty()) {
      const TrialResult& first = result.trials.front();
      for (std::size_t it = 0; it < first.schedule_json.size(); ++it) {
        write_file(dir / ("schedule_" + std::to_string(it) + ".json"), first.schedule_json[it]);
        write_file(dir / ("gantt_" + std::to_string(it) + ".csv"), first.gantt_csv[it]);
      }
    }
  }
  return result;
}

}  // namespace coact

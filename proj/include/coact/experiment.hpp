#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coact/behavior.hpp"
#include "coact/config.hpp"
#include "coact/confidence.hpp"
#include "coact/demo_io.hpp"
#include "coact/runtime.hpp"
#include "coact/scheduler.hpp"

namespace coact {

struct ExperimentConfig {
  int trials = 5;
  int iterations = 60;
  int samples = 500;
  double error_rate = 0.01;
  double fast_bias = 0.25;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 4;
  int pca_window = 10;
  ConfidenceParams confidence;
  SynthTaskSpec task;
  std::vector<double> ranges;  // m+1 entries, augmented channel last

  static ExperimentConfig defaults();
  static ExperimentConfig from_config(const Config& cfg);
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double scheduled_total = 0.0;
  double realized_total = 0.0;
  double highconf_frac = 0.0;
  int corrections = 0;
  int overlap_violations = 0;
};

// Per-trial mutable state across iterations. Warp bounds and the correction
// model stay pinned to the original demonstrations; only the mean trajectory
// absorbs executed data.
struct TrialState {
  DemonstrationSet demos;  // originals plus appended executions
  std::size_t n_original = 0;
  GroundTruthNeed need;
  std::vector<TimeWarp> warps;  // aligned with demos
  WarpBounds bounds;
  ChannelWeights weights_plus;
  BehaviorModel model;
  ConfidenceModel confidence;
  std::vector<std::uint8_t> conf_mask;  // latched: confident steps stay confident
  Schedule schedule;
  bool has_schedule = false;
};

TrialState init_trial(const ExperimentConfig& config, std::uint64_t trial_seed);

IterationRecord run_iteration(TrialState& state, const ExperimentConfig& config, int trial,
                              int iteration);

struct TrialResult {
  int trial = 0;
  double ground_truth_need = 0.0;
  std::vector<IterationRecord> records;
  std::vector<std::string> schedule_json;  // per iteration, kept for trial 0 only
  std::vector<std::string> gantt_csv;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;

  std::string records_csv() const;
  std::string summary_json() const;
};

// Runs all trials (in parallel up to config.threads), writes records.csv,
// summary.json and, for the first trial, per-iteration schedule JSON and
// Gantt CSV files into config.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

}  // namespace coact

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coact/adaptation.hpp"
#include "coact/behavior.hpp"
#include "coact/scheduler.hpp"

namespace coact {

// Simulated operator. Scripted mode follows the ground-truth need function
// with an error rate; the adversarial modes drive corrections to the timing
// extremes and exist to stress the margin guarantees.
struct OperatorModel {
  enum class TimingMode { Scripted, AdversarialRandom, WorstCase };

  std::vector<std::uint8_t> need;  // per reference node
  double error_rate = 0.01;
  double u_min = 0.3;
  double u_max = 1.0;
  std::vector<double> u_sign;  // per-node correction direction, +1 when empty
  TimingMode mode = TimingMode::Scripted;
  int worst_case_fast_agent = 0;

  void validate() const;
};

struct OperatorDecision {
  bool corrected = false;
  double u = 0.0;
};

// Corrects iff need XOR error; |u| drawn uniform from [u_min, u_max].
OperatorDecision scripted_operator(bool need, double error_rate, Rng& rng, double u_min = 0.3,
                                   double u_max = 1.0, double sign = 1.0);

struct TraceRecord {
  double global_t = 0.0;
  double ref_t = 0.0;
  double u = 0.0;
  bool corrected = false;
  double applied_dt = 0.0;
};

struct ExecutionTrace {
  std::vector<TraceRecord> records;
  std::vector<std::vector<double>> states;  // m channels per running step

  Demonstration to_demonstration(double dt) const;
  std::vector<std::pair<double, bool>> correction_trace() const;
};

struct SimulationResult {
  std::array<ExecutionTrace, 2> traces;
  double scheduled_total = 0.0;
  double realized_total = 0.0;
  std::array<int, 2> corrections = {0, 0};
  int overlap_violations = 0;

  // CSV: step, global_t, t1, t2, conf1, conf2, u1, u2, corrected1, corrected2
  std::string trace_csv() const;
  std::string summary_json() const;

  // internal per-step log used for the CSV
  struct StepRow {
    double t = 0.0;
    std::array<double, 2> ref_t = {0.0, 0.0};
    std::array<int, 2> conf = {1, 1};
    std::array<double, 2> u = {0.0, 0.0};
    std::array<int, 2> corrected = {0, 0};
  };
  std::vector<StepRow> rows;
};

// Steps the paired execution at the behavior sample rate: operator-driven
// increments on low-confidence actions, the response strategy and the
// two-high-confidence coordination otherwise, and the pre-start offset
// shift while the second agent waits.
SimulationResult simulate_execution(const Schedule& schedule, const BehaviorModel& model,
                                    const WarpBounds& bounds,
                                    const std::vector<std::uint8_t>& conf,
                                    const OperatorModel& op, Rng& rng);

}  // namespace coact

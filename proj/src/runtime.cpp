#include "coact/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace coact {

void OperatorModel::validate() const {
  if (error_rate < 0.0 || error_rate > 1.0) throw domain_error("operator error_rate outside [0, 1]");
  if (u_min <= 0.0 || u_max > 1.0 || u_min > u_max)
    throw domain_error("operator correction magnitudes must satisfy 0 < u_min <= u_max <= 1");
}

OperatorDecision scripted_operator(bool need, double error_rate, Rng& rng, double u_min,
                                   double u_max, double sign) {
  const bool error = rng.bernoulli(error_rate);
  OperatorDecision dec;
  dec.corrected = need != error;
  if (dec.corrected) dec.u = sign * rng.uniform(u_min, u_max);
  return dec;
}

Demonstration ExecutionTrace::to_demonstration(double dt) const {
  if (states.size() < 2) throw trace_error("execution trace too short to form a demonstration");
  return Demonstration(dt, states);
}

std::vector<std::pair<double, bool>> ExecutionTrace::correction_trace() const {
  std::vector<std::pair<double, bool>> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.emplace_back(rec.ref_t, rec.corrected);
  return out;
}

std::string SimulationResult::trace_csv() const {
  std::ostringstream os;
  os << "step,global_t,t1,t2,conf1,conf2,u1,u2,corrected1,corrected2\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const StepRow& r = rows[k];
    os << k << ',' << format_g9(r.t) << ',' << format_g9(r.ref_t[0]) << ','
       << format_g9(r.ref_t[1]) << ',' << r.conf[0] << ',' << r.conf[1] << ','
       << format_g9(r.u[0]) << ',' << format_g9(r.u[1]) << ',' << r.corrected[0] << ','
       << r.corrected[1] << '\n';
  }
  return os.str();
}

std::string SimulationResult::summary_json() const {
  nlohmann::ordered_json j;
  j["scheduled_total"] = scheduled_total;
  j["realized_total"] = realized_total;
  j["corrections_1"] = corrections[0];
  j["corrections_2"] = corrections[1];
  j["overlap_violations"] = overlap_violations;
  j["steps_1"] = traces[0].records.size();
  j["steps_2"] = traces[1].records.size();
  return j.dump(2);
}

namespace {

std::size_t node_at(const TimeWarp& warp, double s) {
  const double r = warp.eval_inverse(std::clamp(s, 0.0, warp.length()));
  return std::min<std::size_t>(static_cast<std::size_t>(std::lround(r / warp.dt())),
                               warp.nodes() - 1);
}

// Operator-driven step length: the scheduled execution gradient at this step
// divided by the corrected gradient channel, times the sample period.
double operator_step(const TimeWarp& exec, const BehaviorModel& model, std::size_t node, double u,
                     double dt) {
  const std::vector<double> xf = apply_correction(model, node, u);
  const double gf = std::max(xf[model.gradient_channel()], kGradientFloor);
  return exec.gradient_at(node) / gf * dt;
}

OperatorDecision decide(const OperatorModel& op, const BehaviorModel& model, std::size_t node,
                        int agent, Rng& rng) {
  switch (op.mode) {
    case OperatorModel::TimingMode::Scripted: {
      const bool need = node < op.need.size() && op.need[node] != 0;
      const double sign = op.u_sign.empty() ? 1.0 : op.u_sign[std::min(node, op.u_sign.size() - 1)];
      return scripted_operator(need, op.error_rate, rng, op.u_min, op.u_max, sign);
    }
    case OperatorModel::TimingMode::AdversarialRandom:
      return {true, rng.bernoulli(0.5) ? 1.0 : -1.0};
    case OperatorModel::TimingMode::WorstCase: {
      const double bg = model.basis[node][model.gradient_channel()];
      const double toward_fast = bg >= 0.0 ? -1.0 : 1.0;
      return {true, agent == op.worst_case_fast_agent ? toward_fast : -toward_fast};
    }
  }
  throw domain_error("unknown operator timing mode");
}

}  // namespace

SimulationResult simulate_execution(const Schedule& schedule, const BehaviorModel& model,
                                    const WarpBounds& bounds,
                                    const std::vector<std::uint8_t>& conf,
                                    const OperatorModel& op, Rng& rng) {
  op.validate();
  if (conf.size() != model.steps()) throw domain_error("confidence mask does not match the model");
  const double dt = model.dt;
  const std::size_t m = model.state_channels;

  SimulationResult result;
  result.scheduled_total = schedule.total_time();

  // Execution-timeline progress per agent; global positions use the original
  // offset so relative deviations stay in the scheduled frame even after the
  // second start is shifted.
  std::array<double, 2> s = {0.0, 0.0};
  std::array<bool, 2> started = {true, false};
  std::array<bool, 2> finished = {false, false};
  std::array<double, 2> finish_wall = {0.0, 0.0};
  double start2 = schedule.tau;
  if (start2 <= 1e-12) started[1] = true;

  const double wall_limit = 3.0 * result.scheduled_total + 10.0 * dt;
  double t = 0.0;
  while (!finished[0] || !finished[1]) {
    if (t > wall_limit)
      throw divergence_error("execution exceeded three times the scheduled duration");

    std::array<bool, 2> running;
    std::array<std::size_t, 2> node = {0, 0};
    std::array<bool, 2> low = {false, false};
    for (int i = 0; i < 2; ++i) {
      running[i] = started[i] && !finished[i];
      if (running[i]) {
        node[i] = node_at(schedule.exec(i), s[i]);
        low[i] = conf[node[i]] == 0;
      }
    }

    std::array<double, 2> delta = {0.0, 0.0};
    std::array<OperatorDecision, 2> dec;
    if (running[0] && running[1] && low[0] && low[1]) ++result.overlap_violations;
    for (int i = 0; i < 2; ++i) {
      if (!running[i] || !low[i]) continue;
      dec[i] = decide(op, model, node[i], i, rng);
      delta[i] = operator_step(schedule.exec(i), model, node[i], dec[i].u, dt);
    }
    if (running[0] && running[1]) {
      const double dT = s[0] - (schedule.tau + s[1]);  // agent-1 lead
      if (low[0] != low[1]) {
        const int hc = low[0] ? 1 : 0;
        const SpeedFactors f = speed_factors(schedule.exec(hc), bounds, s[hc]);
        delta[hc] = response_step(hc == 0 ? dT : -dT, f.fast, f.slow, dt);
      } else if (!low[0] && !low[1]) {
        if (std::abs(dT) < 1e-12) {
          delta = {dt, dt};
        } else {
          const SpeedFactors f0 = speed_factors(schedule.exec(0), bounds, s[0]);
          const SpeedFactors f1 = speed_factors(schedule.exec(1), bounds, s[1]);
          if (dT > 0.0)
            std::tie(delta[0], delta[1]) = high_conf_step(dT, f0.fast, f1.fast, f0.slow, dt);
          else
            std::tie(delta[1], delta[0]) = high_conf_step(-dT, f1.fast, f0.fast, f1.slow, dt);
        }
      }
    } else {
      for (int i = 0; i < 2; ++i)
        if (running[i] && !low[i]) delta[i] = dt;
    }

    // While the second agent waits, its start shifts with the first agent's
    // accumulated deviation from the schedule.
    if (!started[1] && running[0]) start2 += dt - delta[0];

    SimulationResult::StepRow row;
    row.t = t;
    for (int i = 0; i < 2; ++i) {
      if (!running[i]) {
        row.ref_t[i] = finished[i] ? schedule.exec(i).ref_duration() : 0.0;
        continue;
      }
      const TimeWarp& exec = schedule.exec(i);
      const double ref_t = exec.eval_inverse(s[i]);
      row.ref_t[i] = ref_t;
      row.conf[i] = low[i] ? 0 : 1;
      row.u[i] = dec[i].u;
      row.corrected[i] = dec[i].corrected ? 1 : 0;
      if (dec[i].corrected) ++result.corrections[i];

      ExecutionTrace& tr = result.traces[i];
      tr.records.push_back({t, ref_t, dec[i].u, dec[i].corrected, delta[i]});
      std::vector<double> xf = apply_correction(model, node[i], low[i] ? dec[i].u : 0.0);
      xf.resize(m);
      tr.states.push_back(std::move(xf));

      s[i] += delta[i];
      if (s[i] >= exec.length() - 1e-9) {
        s[i] = exec.length();
        finished[i] = true;
        finish_wall[i] = t + dt;
      }
    }
    result.rows.push_back(row);

    t += dt;
    if (!started[1] && t >= start2 - 1e-9) started[1] = true;
  }

  result.realized_total = std::max(finish_wall[0], finish_wall[1]);
  return result;
}

}  // namespace coact

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coact/experiment.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int threads = 0;
};

coact::ExperimentConfig load_config(const GlobalArgs& args) {
  coact::ExperimentConfig ec = args.config_path.empty()
                                   ? coact::ExperimentConfig::defaults()
                                   : coact::ExperimentConfig::from_config(
                                         coact::Config::from_file(args.config_path));
  if (args.seed_set) ec.seed = args.seed;
  if (!args.out_dir.empty()) ec.out_dir = args.out_dir;
  if (args.threads > 0) ec.threads = args.threads;
  return ec;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw coact::config_error("cannot write output file: " + path.string());
  out << text;
}

std::uint64_t trial0_seed(const coact::ExperimentConfig& ec) {
  return coact::Rng::derive(ec.seed, 500).next_u64();
}

coact::Schedule optimize_once(const coact::ExperimentConfig& ec, const coact::TrialState& state) {
  coact::OptimizerConfig oc;
  oc.samples = ec.samples;
  oc.rng_seed = coact::Rng::derive(ec.seed, 1).next_u64();
  oc.fast_bias = ec.fast_bias;
  oc.threads = ec.threads;
  return coact::optimize_schedule(state.bounds, state.conf_mask, state.model.dt, oc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-agent shared-autonomy coordination engine"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  app.add_option("--config", args.config_path, "configuration file");
  auto* seed_opt = app.add_option("--seed", args.seed, "rng seed (overrides config)");
  app.add_option("--out", args.out_dir, "output directory (overrides config)");
  app.add_option("--threads", args.threads, "worker threads (overrides config)");

  auto* synth = app.add_subcommand("synth", "generate the synthetic demonstration set");
  auto* model = app.add_subcommand("model", "build behavior and confidence models, dump JSON");
  auto* schedule = app.add_subcommand("schedule", "optimize one schedule, dump JSON and Gantt CSV");
  auto* simulate = app.add_subcommand("simulate", "run one paired execution");
  auto* experiment = app.add_subcommand("experiment", "run the full closed-loop experiment");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    const coact::ExperimentConfig ec = load_config(args);
    const std::filesystem::path out(ec.out_dir);

    if (synth->parsed()) {
      auto [set, need] = coact::synthesize_task(ec.task, trial0_seed(ec));
      std::filesystem::create_directories(out);
      coact::save_demonstrations(set, (out / "demos.csv").string());
      std::string need_csv = "t,need\n";
      for (std::size_t k = 0; k < need.need.size(); ++k)
        need_csv += coact::format_g9(static_cast<double>(k) * need.dt) + "," +
                    std::to_string(static_cast<int>(need.need[k])) + "\n";
      write_text(out / "need.csv", need_csv);
      std::cout << "wrote " << (out / "demos.csv").string() << " (" << set.size() << " demos, "
                << set.reference().size() << " samples each)\n";
      return 0;
    }

    const coact::TrialState state = coact::init_trial(ec, trial0_seed(ec));

    if (model->parsed()) {
      std::filesystem::create_directories(out);
      write_text(out / "confidence.json", state.confidence.to_json());
      nlohmann::ordered_json j;
      j["dt"] = state.model.dt;
      j["steps"] = state.model.steps();
      j["state_channels"] = state.model.state_channels;
      j["variance"] = state.model.variance;
      j["correction_scale"] = state.model.scale;
      j["conf_mask"] = state.conf_mask;
      j["mean_gradient"] = state.bounds.mean_gradient;
      j["min_gradient"] = state.bounds.min_gradient;
      j["max_gradient"] = state.bounds.max_gradient;
      write_text(out / "model.json", j.dump(2));
      std::cout << "wrote " << (out / "model.json").string() << " and confidence.json\n";
      return 0;
    }

    if (schedule->parsed()) {
      const coact::Schedule s = optimize_once(ec, state);
      std::filesystem::create_directories(out);
      write_text(out / "schedule.json", s.to_json(true, s.total_time()));
      write_text(out / "gantt.csv", coact::schedule_gantt_csv(s, state.conf_mask));
      std::cout << "scheduled total time " << coact::format_g9(s.total_time()) << " s, tau "
                << coact::format_g9(s.tau) << " s\n";
      return 0;
    }

    if (simulate->parsed()) {
      const coact::Schedule s = optimize_once(ec, state);
      coact::OperatorModel op;
      op.need = state.need.need;
      op.error_rate = ec.error_rate;
      coact::Rng rng(coact::Rng::derive(ec.seed, 2).next_u64());
      const coact::SimulationResult sim =
          coact::simulate_execution(s, state.model, state.bounds, state.conf_mask, op, rng);
      std::filesystem::create_directories(out);
      write_text(out / "trace.csv", sim.trace_csv());
      write_text(out / "sim_summary.json", sim.summary_json());
      std::cout << "realized total time " << coact::format_g9(sim.realized_total) << " s ("
                << coact::format_g9(sim.scheduled_total) << " scheduled)\n";
      return 0;
    }

    if (experiment->parsed()) {
      const coact::ExperimentResult res = coact::run_experiment(ec);
      std::cout << "wrote " << (out / "records.csv").string() << " and summary.json ("
                << res.trials.size() << " trials)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

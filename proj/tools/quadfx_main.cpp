#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadfx/harness.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitSolverAbort = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir{"."};
  std::string controller;
  std::string scenario;
  double duration{-1.0};
  std::int64_t seed{-1};
  double rmse_start{-1.0};
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (INI-style sections)");
  cmd->add_option("--set", args.overrides, "Override a key, e.g. --set mpc.horizon=12")
      ->take_all();
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--controller", args.controller, "pid|mpc|rtmpc|hgdo-mpc|fxtdo-mpc");
  cmd->add_option("--scenario", args.scenario, "eight|hover");
  cmd->add_option("--duration", args.duration, "Run duration in seconds");
  cmd->add_option("--seed", args.seed, "Random seed");
  cmd->add_option("--rmse-start", args.rmse_start, "Start of the RMSE window in seconds");
}

quadfx::ExperimentConfig build_config(const CommonArgs& args) {
  quadfx::ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = quadfx::load_config(args.config_path);
  }
  for (const std::string& kv : args.overrides) {
    quadfx::apply_override(cfg, kv);
  }
  if (!args.controller.empty()) {
    cfg.controller = args.controller;
  }
  if (!args.scenario.empty()) {
    cfg.scenario = args.scenario;
  }
  if (args.duration > 0.0) {
    cfg.duration = args.duration;
  }
  if (args.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(args.seed);
  }
  if (args.rmse_start >= 0.0) {
    cfg.rmse_start_time = args.rmse_start;
  }
  cfg.finalize();
  quadfx::validate(cfg);
  return cfg;
}

nlohmann::json metrics_to_json(const quadfx::Metrics& m) {
  return {
      {"rmse_3d_m", m.rmse_3d},
      {"rmse_axis_m", {m.rmse_axis.x(), m.rmse_axis.y(), m.rmse_axis.z()}},
      {"max_error_m", m.max_error},
      {"observer_convergence_time_s", m.observer_convergence_time},
      {"mean_solver_kkt", m.mean_kkt},
      {"real_time_factor", m.real_time_factor},
  };
}

int run_command(const CommonArgs& args) {
  const quadfx::ExperimentConfig cfg = build_config(args);
  const quadfx::RunLog log = quadfx::run_closed_loop(cfg);

  std::filesystem::create_directories(args.out_dir);
  const auto csv_path = std::filesystem::path(args.out_dir) / "run.csv";
  quadfx::write_csv(log, csv_path.string());

  const quadfx::Metrics m = quadfx::compute_metrics(log, cfg);
  nlohmann::json summary = {
      {"scenario", cfg.scenario},
      {"controller", cfg.controller},
      {"disturbance", cfg.disturbance},
      {"duration_s", cfg.duration},
      {"seed", cfg.seed},
      {"aborted", log.aborted},
      {"metrics", metrics_to_json(m)},
  };
  if (log.aborted) {
    summary["error"] = log.error;
  }
  const auto summary_path = std::filesystem::path(args.out_dir) / "summary.json";
  std::ofstream(summary_path) << summary.dump(2) << "\n";

  std::printf("%s %s: rmse=%.4f m  max=%.4f m  conv=%.3f s  rtf=%.1f\n",
              cfg.controller.c_str(), cfg.scenario.c_str(), m.rmse_3d, m.max_error,
              m.observer_convergence_time, m.real_time_factor);
  if (log.aborted) {
    std::fprintf(stderr, "run aborted: %s\n", log.error.c_str());
    return kExitSolverAbort;
  }
  return 0;
}

int compare_command(const CommonArgs& args) {
  static const char* kControllers[] = {"pid", "mpc", "rtmpc", "hgdo-mpc", "fxtdo-mpc"};
  nlohmann::json summary;
  bool any_abort = false;

  std::printf("%-10s  %10s  %10s  %12s\n", "controller", "rmse [m]", "max [m]", "conv [s]");
  for (const char* controller : kControllers) {
    CommonArgs per = args;
    per.controller = controller;
    const quadfx::ExperimentConfig cfg = build_config(per);
    const quadfx::RunLog log = quadfx::run_closed_loop(cfg);
    if (log.aborted) {
      any_abort = true;
      std::printf("%-10s  aborted: %s\n", controller, log.error.c_str());
      summary[controller] = {{"aborted", true}, {"error", log.error}};
      continue;
    }
    const quadfx::Metrics m = quadfx::compute_metrics(log, cfg);
    std::printf("%-10s  %10.4f  %10.4f  %12.3f\n", controller, m.rmse_3d, m.max_error,
                m.observer_convergence_time);
    summary[controller] = metrics_to_json(m);
  }

  std::filesystem::create_directories(args.out_dir);
  const auto summary_path = std::filesystem::path(args.out_dir) / "summary.json";
  std::ofstream(summary_path) << summary.dump(2) << "\n";
  return any_abort ? kExitSolverAbort : 0;
}

int montecarlo_command(const CommonArgs& args, int runs, bool serial) {
  const quadfx::ExperimentConfig cfg = build_config(args);
  const quadfx::MonteCarloSummary summary =
      quadfx::monte_carlo(cfg, runs, cfg.seed, !serial);

  std::filesystem::create_directories(args.out_dir);
  const auto csv_path = std::filesystem::path(args.out_dir) / "montecarlo.csv";
  quadfx::write_monte_carlo_csv(summary, csv_path.string());

  nlohmann::json js = {
      {"controller", cfg.controller}, {"runs", runs},
      {"median_rmse_m", summary.median}, {"mean_rmse_m", summary.mean},
      {"q25_rmse_m", summary.q25},       {"q75_rmse_m", summary.q75},
      {"failures", summary.failures},
  };
  const auto summary_path = std::filesystem::path(args.out_dir) / "summary.json";
  std::ofstream(summary_path) << js.dump(2) << "\n";

  std::printf("%s montecarlo n=%d: median=%.4f m  iqr=[%.4f, %.4f]  failures=%d\n",
              cfg.controller.c_str(), runs, summary.median, summary.q25, summary.q75,
              summary.failures);
  return summary.failures == runs ? kExitSolverAbort : 0;
}

int check_gains_command(const CommonArgs& args) {
  const quadfx::ExperimentConfig cfg = build_config(args);
  const quadfx::DisturbanceProfile profile = cfg.make_disturbance();
  const double bound = profile.force_derivative_bound();
  const quadfx::GainCheckReport report = quadfx::check_gain_conditions(cfg.fxtdo, bound);
  std::printf("force derivative bound: %.4f N/s\n", report.fdot_bound);
  std::printf("L2*k2 = %.4f\n", report.l2_times_k2);
  std::printf("L2 condition: %s margin %.4f\n", report.l2_condition_ok ? "PASS" : "FAIL",
              report.margin);
  std::printf("L1 = %.4f (tunable; no verifiable closed-form condition)\n", report.l1);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrotor disturbance-observer MPC simulation harness"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Single closed-loop run, writes run.csv");
  add_common(run_cmd, run_args);

  CommonArgs compare_args;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Run all five controllers on one scenario");
  add_common(compare_cmd, compare_args);

  CommonArgs mc_args;
  int mc_runs = 100;
  bool mc_serial = false;
  CLI::App* mc_cmd = app.add_subcommand("montecarlo", "Batch with random disturbance scales");
  add_common(mc_cmd, mc_args);
  mc_cmd->add_option("--runs", mc_runs, "Number of runs")->check(CLI::PositiveNumber);
  mc_cmd->add_flag("--serial", mc_serial, "Disable the parallel batch runner");

  CommonArgs gains_args;
  CLI::App* gains_cmd =
      app.add_subcommand("check-gains", "Observer gain condition report");
  add_common(gains_cmd, gains_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return run_command(run_args);
    }
    if (compare_cmd->parsed()) {
      return compare_command(compare_args);
    }
    if (mc_cmd->parsed()) {
      return montecarlo_command(mc_args, mc_runs, mc_serial);
    }
    if (gains_cmd->parsed()) {
      return check_gains_command(gains_args);
    }
  } catch (const quadfx::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

#ifndef QUADFX_HARNESS_HPP
#define QUADFX_HARNESS_HPP

#include <string>
#include <vector>

#include "quadfx/config.hpp"

namespace quadfx {

/// One plant-rate log row. Commands are the ones applied over [t, t+h).
struct LogRow {
  double t{0.0};
  QuadState state{};
  Vec3 p_ref{Vec3::Zero()};
  double thrust_cmd{0.0};
  Vec3 omega_cmd{Vec3::Zero()};
  Vec3 torque_cmd{Vec3::Zero()};
  Vec3 fd_true{Vec3::Zero()};
  Vec3 tau_true{Vec3::Zero()};
  Vec3 fd_hat{Vec3::Zero()};
  int solver_degraded{0};
  double solver_kkt{0.0};
};

struct RunLog {
  std::vector<LogRow> rows;
  bool aborted{false};
  std::string error;
  double wall_seconds{0.0};
};

struct Metrics {
  double rmse_3d{0.0};
  Vec3 rmse_axis{Vec3::Zero()};
  double max_error{0.0};
  double observer_convergence_time{-1.0};  // s after activation; -1 = unconverged/no window
  double mean_kkt{0.0};
  double real_time_factor{0.0};
};

/// Deterministic multirate closed loop: disturbance, observer and the
/// incremental rate controller run at the plant rate, the outer controller
/// at the control rate with zero-order-held commands in between.
RunLog run_closed_loop(const ExperimentConfig& cfg);

/// 3D/per-axis position RMSE over t >= t_start. Throws std::invalid_argument
/// on an empty window.
Metrics compute_rmse(const RunLog& log, double t_start);

/// First time after the disturbance activation at which |fd_hat - fd| drops
/// below `band` and stays below 2*band for the rest of the run; -1 when the
/// log never converges.
double convergence_time(const RunLog& log, double band, double activation_time);

/// Metrics bundle for one finished run.
Metrics compute_metrics(const RunLog& log, const ExperimentConfig& cfg);

void write_csv(const RunLog& log, const std::string& path);

struct MonteCarloRun {
  int index{0};
  double scale{0.0};  // k ~ U[0,1]
  double rmse{0.0};
  bool failed{false};
};

struct MonteCarloSummary {
  std::vector<MonteCarloRun> runs;  // ordered by index
  double median{0.0};
  double mean{0.0};
  double q25{0.0};
  double q75{0.0};
  int failures{0};
};

/// n independent runs with per-run force scales drawn from U[0,1] using
/// seeds derived from (seed, run index); identical seeds give identical
/// summaries whether executed serially or with the parallel batch runner.
MonteCarloSummary monte_carlo(const ExperimentConfig& cfg, int n, std::uint64_t seed,
                              bool parallel = true);

void write_monte_carlo_csv(const MonteCarloSummary& summary, const std::string& path);

}  // namespace quadfx

#endif  // QUADFX_HARNESS_HPP

#include "quadfx/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace quadfx {

namespace {

/// splitmix64, used to derive independent per-run seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits (portable and exact).
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

RunLog run_closed_loop(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.finalize();
  validate(cfg);

  const DisturbanceProfile profile = cfg.make_disturbance();
  const FlatTrajectory traj = cfg.make_trajectory();
  const double h = 1.0 / cfg.plant_rate_hz;
  const int steps = static_cast<int>(std::llround(cfg.duration * cfg.plant_rate_hz));
  const int control_ratio = cfg.plant_rate_hz / cfg.mpc_rate_hz;
  const double mass = cfg.plant.mass;

  // Start on the reference to avoid an artificial takeoff transient.
  const ReferencePoint ref0 = flat_to_reference(traj(0.0), mass);
  QuadState state;
  state.position = ref0.position;
  state.velocity = ref0.velocity;
  state.attitude = ref0.attitude;
  state.omega = ref0.omega;

  ObserverState observer;
  observer.z1_hat = mass * state.velocity;

  IndiController indi(cfg.indi, cfg.plant.inertia_diag, cfg.plant.torque_limits,
                      cfg.indi_cutoff_hz, h);

  const bool is_pid = cfg.controller == "pid";
  const bool is_rtmpc = cfg.controller == "rtmpc";
  const bool use_fxtdo = cfg.controller == "fxtdo-mpc";
  const bool use_hgdo = cfg.controller == "hgdo-mpc";

  std::unique_ptr<PidController> pid;
  std::unique_ptr<MpcController> mpc;
  std::unique_ptr<RtMpcController> rtmpc;
  const double control_period = 1.0 / cfg.mpc_rate_hz;
  MpcConfig mpc_cfg = cfg.mpc;
  mpc_cfg.steps_per_shift =
      std::max(1, static_cast<int>(std::llround(cfg.mpc.dt * cfg.mpc_rate_hz)));
  if (is_pid) {
    pid = std::make_unique<PidController>(cfg.pid, cfg.plant, cfg.mpc, control_period);
  } else if (is_rtmpc) {
    rtmpc = std::make_unique<RtMpcController>(cfg.weights, mpc_cfg, cfg.plant,
                                              cfg.tube_initial_state_penalty);
  } else {
    mpc = std::make_unique<MpcController>(cfg.weights, mpc_cfg, mass);
  }

  std::mt19937_64 noise_rng(mix_seed(cfg.seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);

  RunLog log;
  log.rows.reserve(static_cast<size_t>(steps) + 1);

  OuterCommand cmd;
  cmd.thrust = ref0.thrust;
  double last_kkt = 0.0;
  int degraded_streak = 0;
  bool degraded_now = false;

  const auto wall_start = std::chrono::steady_clock::now();

  for (int k = 0; k <= steps; ++k) {
    const double t = k * h;
    const DisturbanceSample dist = profile.at(t);

    QuadState meas = state;
    if (cfg.measurement_noise) {
      for (int i = 0; i < 3; ++i) {
        meas.position[i] += cfg.noise_position_std * gauss(noise_rng);
        meas.velocity[i] += cfg.noise_velocity_std * gauss(noise_rng);
      }
    }

    const Vec3 fd_hat_now = observer.fd_hat;

    if (k % control_ratio == 0 && k < steps) {
      degraded_now = false;
      if (is_pid) {
        const ReferencePoint ref = flat_to_reference(traj(t), mass);
        cmd = pid->step(meas, ref);
      } else {
        const std::vector<ReferencePoint> refs =
            sample_horizon(traj, t, cfg.mpc.horizon, cfg.mpc.dt, mass);
        if (is_rtmpc) {
          cmd = rtmpc->step(meas, refs);
          degraded_now = rtmpc->degraded();
          last_kkt = rtmpc->nominal().solution().kkt_residual;
        } else {
          const Vec3 fd_for_mpc = use_fxtdo || use_hgdo ? fd_hat_now : Vec3::Zero();
          bool degraded = false;
          cmd = observer_mpc_step(*mpc, meas, fd_for_mpc, refs, &degraded);
          degraded_now = degraded;
          last_kkt = mpc->solution().kkt_residual;
        }
      }
      degraded_streak = degraded_now ? degraded_streak + 1 : 0;
      if (degraded_streak > 10) {
        log.aborted = true;
        log.error = "solver failed on more than 10 consecutive control steps";
      }
    }

    const Vec3 torque =
        indi.step(meas.omega, cmd.omega_cmd, Vec3::Zero());
    Wrench wrench = saturate_wrench({cmd.thrust, torque}, cfg.plant);
    if (cfg.plant.use_motor_allocation) {
      wrench = mix_motors(allocate_motors(wrench, cfg.plant).thrusts, cfg.plant);
    }

    LogRow row;
    row.t = t;
    row.state = state;
    row.p_ref = traj(t).position;
    row.thrust_cmd = wrench.thrust;
    row.omega_cmd = cmd.omega_cmd;
    row.torque_cmd = wrench.torque;
    row.fd_true = dist.force;
    row.tau_true = dist.torque;
    row.fd_hat = fd_hat_now;
    row.solver_degraded = degraded_now ? 1 : 0;
    row.solver_kkt = last_kkt;
    log.rows.push_back(row);

    if (log.aborted || k == steps) {
      break;
    }

    // Observer advances over [t, t+h) from the measurement at t and the
    // commanded (post-saturation) thrust.
    const Vec3 z1_meas = mass * meas.velocity;
    const Vec3 virtual_u = virtual_input(meas.attitude, wrench.thrust, mass);
    if (use_hgdo) {
      observer = hgdo_step(observer, z1_meas, virtual_u, cfg.hgdo, h);
    } else {
      observer = fxtdo_step(observer, z1_meas, virtual_u, cfg.fxtdo, h);
    }

    state = rk4_step(state, wrench, dist.force, dist.torque, cfg.plant, h);
  }

  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return log;
}

Metrics compute_rmse(const RunLog& log, double t_start) {
  double sum3 = 0.0;
  Vec3 sum_axis = Vec3::Zero();
  double max_err = 0.0;
  size_t count = 0;
  for (const LogRow& row : log.rows) {
    if (row.t + 1e-12 < t_start) {
      continue;
    }
    const Vec3 e = row.state.position - row.p_ref;
    sum3 += e.squaredNorm();
    sum_axis += e.cwiseProduct(e);
    max_err = std::max(max_err, e.norm());
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("compute_rmse: empty evaluation window");
  }
  Metrics m;
  m.rmse_3d = std::sqrt(sum3 / static_cast<double>(count));
  m.rmse_axis = (sum_axis / static_cast<double>(count)).cwiseSqrt();
  m.max_error = max_err;
  return m;
}

double convergence_time(const RunLog& log, double band, double activation_time) {
  const size_t n = log.rows.size();
  if (n == 0) {
    return -1.0;
  }
  // Suffix maxima of the estimation error for the stay-in-band condition.
  std::vector<double> err(n);
  for (size_t i = 0; i < n; ++i) {
    err[i] = (log.rows[i].fd_hat - log.rows[i].fd_true).norm();
  }
  std::vector<double> suffix_max(n);
  suffix_max[n - 1] = err[n - 1];
  for (size_t i = n - 1; i-- > 0;) {
    suffix_max[i] = std::max(err[i], suffix_max[i + 1]);
  }
  for (size_t i = 0; i < n; ++i) {
    if (log.rows[i].t + 1e-12 < activation_time) {
      continue;
    }
    if (err[i] < band && suffix_max[i] < 2.0 * band) {
      return log.rows[i].t - activation_time;
    }
  }
  return -1.0;
}

Metrics compute_metrics(const RunLog& log, const ExperimentConfig& cfg) {
  Metrics m = compute_rmse(log, cfg.rmse_start_time);
  const DisturbanceProfile profile = cfg.make_disturbance();
  if (profile.kind != DisturbanceProfile::Kind::None && profile.force_amplitude() > 0.0) {
    const double band = 0.05 * profile.force_amplitude();
    m.observer_convergence_time = convergence_time(log, band, cfg.resolved_activation_time());
  }
  double kkt_sum = 0.0;
  for (const LogRow& row : log.rows) {
    kkt_sum += row.solver_kkt;
  }
  m.mean_kkt = log.rows.empty() ? 0.0 : kkt_sum / static_cast<double>(log.rows.size());
  m.real_time_factor = log.wall_seconds > 0.0
                           ? (log.rows.empty() ? 0.0 : log.rows.back().t) / log.wall_seconds
                           : 0.0;
  return m;
}

void write_csv(const RunLog& log, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    throw std::runtime_error("write_csv: cannot open '" + path + "'");
  }
  std::fputs(
      "# quadfx run log v1\n"
      "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,"
      "ref_px,ref_py,ref_pz,thrust_cmd,omega_cmd_x,omega_cmd_y,omega_cmd_z,"
      "torque_x,torque_y,torque_z,fd_x,fd_y,fd_z,tau_x,tau_y,tau_z,"
      "fd_hat_x,fd_hat_y,fd_hat_z,solver_degraded,solver_kkt\n",
      f);
  for (const LogRow& r : log.rows) {
    std::fprintf(
        f,
        "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
        "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
        "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
        "%d,%.12g\n",
        r.t, r.state.position.x(), r.state.position.y(), r.state.position.z(),
        r.state.velocity.x(), r.state.velocity.y(), r.state.velocity.z(), r.state.attitude.w,
        r.state.attitude.x, r.state.attitude.y, r.state.attitude.z, r.state.omega.x(),
        r.state.omega.y(), r.state.omega.z(), r.p_ref.x(), r.p_ref.y(), r.p_ref.z(),
        r.thrust_cmd, r.omega_cmd.x(), r.omega_cmd.y(), r.omega_cmd.z(), r.torque_cmd.x(),
        r.torque_cmd.y(), r.torque_cmd.z(), r.fd_true.x(), r.fd_true.y(), r.fd_true.z(),
        r.tau_true.x(), r.tau_true.y(), r.tau_true.z(), r.fd_hat.x(), r.fd_hat.y(),
        r.fd_hat.z(), r.solver_degraded, r.solver_kkt);
  }
  std::fclose(f);
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    return 0.0;
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

MonteCarloSummary monte_carlo(const ExperimentConfig& cfg, int n, std::uint64_t seed,
                              bool parallel) {
  if (n < 1) {
    throw std::invalid_argument("monte_carlo: n must be >= 1");
  }
  MonteCarloSummary summary;
  summary.runs.resize(static_cast<size_t>(n));

  // Scales drawn up front so the draw order never depends on scheduling.
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    summary.runs[static_cast<size_t>(i)].index = i;
    summary.runs[static_cast<size_t>(i)].scale = uniform01(rng);
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int i = 0; i < n; ++i) {
    MonteCarloRun& run = summary.runs[static_cast<size_t>(i)];
    ExperimentConfig run_cfg = cfg;
    run_cfg.disturbance_scale = run.scale;
    run_cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(i) + 0x10000ULL);
    try {
      const RunLog log = run_closed_loop(run_cfg);
      if (log.aborted) {
        run.failed = true;
      } else {
        run.rmse = compute_rmse(log, run_cfg.rmse_start_time).rmse_3d;
      }
    } catch (const std::exception&) {
      run.failed = true;
    }
  }

  std::vector<double> ok;
  ok.reserve(summary.runs.size());
  for (const MonteCarloRun& run : summary.runs) {
    if (run.failed) {
      ++summary.failures;
    } else {
      ok.push_back(run.rmse);
    }
  }
  std::sort(ok.begin(), ok.end());
  summary.median = quantile(ok, 0.5);
  summary.mean = ok.empty() ? 0.0
                            : std::accumulate(ok.begin(), ok.end(), 0.0) /
                                  static_cast<double>(ok.size());
  summary.q25 = quantile(ok, 0.25);
  summary.q75 = quantile(ok, 0.75);
  return summary;
}

void write_monte_carlo_csv(const MonteCarloSummary& summary, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    throw std::runtime_error("write_monte_carlo_csv: cannot open '" + path + "'");
  }
  std::fputs("# quadfx monte carlo v1\nrun,k,rmse,failed\n", f);
  for (const MonteCarloRun& run : summary.runs) {
    std::fprintf(f, "%d,%.12g,%.12g,%d\n", run.index, run.scale, run.rmse,
                 run.failed ? 1 : 0);
  }
  std::fclose(f);
}

}  // namespace quadfx

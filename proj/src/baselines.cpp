#include "quadfx/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadfx {

PidController::PidController(const PidGains& gains, const QuadParams& params,
                             const MpcConfig& limits, double sample_time)
    : gains_(gains), params_(params), limits_(limits), sample_time_(sample_time) {
  if (sample_time_ <= 0.0) {
    throw std::invalid_argument("PidController: sample time must be positive");
  }
}

void PidController::reset() { integrator_.setZero(); }

OuterCommand PidController::step(const QuadState& state, const ReferencePoint& ref) {
  const Vec3 e_p = ref.position - state.position;
  const Vec3 e_v = ref.velocity - state.velocity;

  integrator_ += e_p * sample_time_;
  for (int i = 0; i < 3; ++i) {
    // Anti-windup: keep the integral acceleration contribution bounded.
    const double cap = gains_.position_i[i] > 0.0
                           ? gains_.integrator_limit / gains_.position_i[i]
                           : 0.0;
    integrator_[i] = std::clamp(integrator_[i], -cap, cap);
  }

  // Conventional cascade without acceleration feedforward: the velocity
  // reference enters through the D term only.
  const Vec3 a_cmd = gains_.position_p.cwiseProduct(e_p) +
                     gains_.position_i.cwiseProduct(integrator_) +
                     gains_.position_d.cwiseProduct(e_v);

  FlatOutput desired;
  desired.acceleration = a_cmd;
  desired.yaw = quat_yaw(ref.attitude);
  const ReferencePoint attitude_ref = flat_to_reference(desired, params_.mass);

  // Attitude P: body-frame error quaternion to a rate command.
  const Quat q_err_raw =
      quat_multiply(quat_conjugate(state.attitude), attitude_ref.attitude);
  const Quat q_err = q_err_raw.w >= 0.0
                         ? q_err_raw
                         : Quat{-q_err_raw.w, -q_err_raw.x, -q_err_raw.y, -q_err_raw.z};

  OuterCommand cmd;
  cmd.thrust = std::clamp(attitude_ref.thrust, limits_.thrust_min, limits_.thrust_max);
  cmd.omega_cmd = gains_.attitude_p * 2.0 * Vec3(q_err.x, q_err.y, q_err.z) + ref.omega;
  for (int i = 0; i < 3; ++i) {
    cmd.omega_cmd[i] = std::clamp(cmd.omega_cmd[i], -limits_.omega_max, limits_.omega_max);
  }
  return cmd;
}

DareSolution dare_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r, double tolerance,
                        int max_iterations) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != m ||
      r.cols() != m) {
    throw std::invalid_argument("dare_solve: dimension mismatch");
  }

  Eigen::MatrixXd p = q;
  double diff = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const Eigen::MatrixXd btp = b.transpose() * p;
    const Eigen::MatrixXd gain_denom = r + btp * b;
    const Eigen::MatrixXd p_next =
        q + a.transpose() * p * a -
        a.transpose() * p * b * gain_denom.ldlt().solve(btp * a);
    diff = (p_next - p).cwiseAbs().maxCoeff();
    p = 0.5 * (p_next + p_next.transpose());  // keep symmetric
    if (diff < tolerance) {
      break;
    }
    if (!p.allFinite()) {
      throw std::runtime_error("dare_solve: iteration diverged (unstabilizable pair?)");
    }
  }
  if (diff >= tolerance) {
    throw std::runtime_error("dare_solve: no convergence within the iteration limit");
  }

  DareSolution sol;
  sol.p = p;
  const Eigen::MatrixXd gain_denom = r + b.transpose() * p * b;
  sol.k = gain_denom.ldlt().solve(b.transpose() * p * a);
  sol.iterations = iter + 1;
  const Eigen::MatrixXd residual =
      p - (q + a.transpose() * p * a -
           a.transpose() * p * b * gain_denom.ldlt().solve(b.transpose() * p * a));
  sol.residual = residual.cwiseAbs().maxCoeff();
  return sol;
}

TubeConfig make_hover_tube_config(const QuadParams& params, const MpcWeights& weights,
                                  double dt, double initial_state_penalty) {
  // Error states [p, v, theta] with theta the small-angle attitude error;
  // inputs [dT, omega]. Yaw stays decoupled from translation.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(9, 9);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(9, 4);
  a.block<3, 3>(0, 3).setIdentity();
  a(3, 7) = -kGravity;  // x-acceleration from pitch
  a(4, 6) = kGravity;   // y-acceleration from roll
  b(5, 0) = -1.0 / params.mass;
  b.block<3, 3>(6, 1).setIdentity();

  // Exact discretization: a is nilpotent (a^4 = 0), so the series is finite.
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a3 = a2 * a;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(9, 9);
  const Eigen::MatrixXd ad = eye + a * dt + a2 * (dt * dt / 2.0) + a3 * (dt * dt * dt / 6.0);
  const Eigen::MatrixXd bd =
      (eye * dt + a * (dt * dt / 2.0) + a2 * (dt * dt * dt / 6.0) +
       a3 * (dt * dt * dt * dt / 24.0)) *
      b;

  Eigen::VectorXd q_diag(9);
  q_diag.segment<3>(0) = weights.q_position;
  q_diag.segment<3>(3) = weights.q_velocity;
  // Quaternion vector components are half-angles: w_q * (theta/2)^2.
  q_diag.segment<3>(6) = weights.q_attitude.tail<3>() / 4.0;
  Eigen::VectorXd r_diag(4);
  r_diag = weights.r_input;

  const DareSolution dare =
      dare_solve(ad, bd, q_diag.asDiagonal(), r_diag.asDiagonal());

  TubeConfig cfg;
  cfg.a = ad;
  cfg.b = bd;
  cfg.k = dare.k;
  cfg.initial_state_penalty = initial_state_penalty;
  return cfg;
}

RtMpcController::RtMpcController(const MpcWeights& weights, const MpcConfig& config,
                                 const QuadParams& params, double initial_state_penalty)
    : nominal_(weights, config, params.mass),
      tube_(make_hover_tube_config(params, weights, config.dt, initial_state_penalty)),
      config_(config) {
  nominal_.set_initial_state_penalty(tube_.initial_state_penalty);
}

void RtMpcController::reset() {
  nominal_.reset();
  degraded_ = false;
}

OuterCommand RtMpcController::step(const QuadState& state,
                                   const std::vector<ReferencePoint>& refs) {
  const MpcController::StepResult res = nominal_.step(state, Vec3::Zero(), refs);
  degraded_ = res.degraded;

  // Deviation of the measurement from the nominal initial state.
  const StateVec x_nom = nominal_.solution().states[0];
  const Quat q_nom = quat_normalize(Quat::from_coeffs(x_nom.segment<4>(6)));
  const Quat q_meas = quat_align_sign(q_nom, state.attitude);
  const Quat q_rel = quat_multiply(quat_conjugate(q_nom), q_meas);
  const Quat q_rel_pos =
      q_rel.w >= 0.0 ? q_rel : Quat{-q_rel.w, -q_rel.x, -q_rel.y, -q_rel.z};

  Eigen::VectorXd error(9);
  error.segment<3>(0) = state.position - x_nom.segment<3>(0);
  error.segment<3>(3) = state.velocity - x_nom.segment<3>(3);
  error.segment<3>(6) = 2.0 * Vec3(q_rel_pos.x, q_rel_pos.y, q_rel_pos.z);

  const Eigen::Vector4d feedback = tube_.k * error;

  OuterCommand cmd;
  cmd.thrust = std::clamp(res.u0[0] - feedback[0], config_.thrust_min, config_.thrust_max);
  for (int i = 0; i < 3; ++i) {
    cmd.omega_cmd[i] = std::clamp(res.u0[i + 1] - feedback[i + 1], -config_.omega_max,
                                  config_.omega_max);
  }
  return cmd;
}

OuterCommand plain_mpc_step(MpcController& mpc, const QuadState& state,
                            const std::vector<ReferencePoint>& refs, bool* degraded) {
  return observer_mpc_step(mpc, state, Vec3::Zero(), refs, degraded);
}

OuterCommand observer_mpc_step(MpcController& mpc, const QuadState& state, const Vec3& fd_hat,
                               const std::vector<ReferencePoint>& refs, bool* degraded) {
  const MpcController::StepResult res = mpc.step(state, fd_hat, refs);
  if (degraded != nullptr) {
    *degraded = res.degraded;
  }
  OuterCommand cmd;
  cmd.thrust = res.u0[0];
  cmd.omega_cmd = res.u0.segment<3>(1);
  return cmd;
}

}  // namespace quadfx

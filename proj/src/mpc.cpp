#include "quadfx/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace quadfx {

StateVec pack_state(const QuadState& s) {
  StateVec x;
  x.segment<3>(0) = s.position;
  x.segment<3>(3) = s.velocity;
  x.segment<4>(6) = s.attitude.coeffs();
  return x;
}

StateVec pack_reference_state(const ReferencePoint& r) {
  StateVec x;
  x.segment<3>(0) = r.position;
  x.segment<3>(3) = r.velocity;
  x.segment<4>(6) = r.attitude.coeffs();
  return x;
}

InputVec pack_reference_input(const ReferencePoint& r) {
  InputVec u;
  u[0] = r.thrust;
  u.segment<3>(1) = r.omega;
  return u;
}

StateVec MpcWeights::stage_state_diag() const {
  StateVec d;
  d.segment<3>(0) = q_position;
  d.segment<3>(3) = q_velocity;
  d.segment<4>(6) = q_attitude;
  return d;
}

StateVec MpcWeights::terminal_state_diag() const {
  StateVec d;
  d.segment<3>(0) = p_position;
  d.segment<3>(3) = p_velocity;
  d.segment<4>(6) = p_attitude;
  return d;
}

StateVec prediction_derivative(const StateVec& x, const InputVec& u, const Vec3& fd_hat,
                               double mass) {
  const double qw = x[6], qx = x[7], qy = x[8], qz = x[9];
  const double thrust = u[0];
  const Vec3 omega = u.segment<3>(1);

  // Third column of R(q) without assuming unit norm would change results;
  // shooting keeps |q| within ~1e-6 of 1 over the horizon.
  const Vec3 r_ez(2.0 * (qw * qy + qx * qz), 2.0 * (qy * qz - qw * qx),
                  1.0 - 2.0 * (qx * qx + qy * qy));

  StateVec dx;
  dx.segment<3>(0) = x.segment<3>(3);
  dx.segment<3>(3) = -(thrust / mass) * r_ez + Vec3(0.0, 0.0, kGravity) + fd_hat / mass;
  const double wx = omega.x(), wy = omega.y(), wz = omega.z();
  dx[6] = 0.5 * (-wx * qx - wy * qy - wz * qz);
  dx[7] = 0.5 * (wx * qw + wz * qy - wy * qz);
  dx[8] = 0.5 * (wy * qw - wz * qx + wx * qz);
  dx[9] = 0.5 * (wz * qw + wy * qx - wx * qy);
  return dx;
}

void prediction_jacobians(const StateVec& x, const InputVec& u, double mass,
                          StateMat& jac_state, InputJacMat& jac_input) {
  const double qw = x[6], qx = x[7], qy = x[8], qz = x[9];
  const double thrust = u[0];
  const double wx = u[1], wy = u[2], wz = u[3];

  jac_state.setZero();
  jac_input.setZero();

  jac_state.block<3, 3>(0, 3).setIdentity();

  // d(R e_z)/dq, columns (w, x, y, z).
  Eigen::Matrix<double, 3, 4> d_rez;
  d_rez << 2 * qy, 2 * qz, 2 * qw, 2 * qx,
      -2 * qx, -2 * qw, 2 * qz, 2 * qy,
      0.0, -4 * qx, -4 * qy, 0.0;
  jac_state.block<3, 4>(3, 6) = -(thrust / mass) * d_rez;

  const Vec3 r_ez(2.0 * (qw * qy + qx * qz), 2.0 * (qy * qz - qw * qx),
                  1.0 - 2.0 * (qx * qx + qy * qy));
  jac_input.block<3, 1>(3, 0) = -r_ez / mass;

  // Quaternion kinematics: dq_dot/dq = 0.5 * Omega(omega).
  Eigen::Matrix4d omega_mat;
  omega_mat << 0, -wx, -wy, -wz,
      wx, 0, wz, -wy,
      wy, -wz, 0, wx,
      wz, wy, -wx, 0;
  jac_state.block<4, 4>(6, 6) = 0.5 * omega_mat;

  // dq_dot/domega = 0.5 * L(q).
  Eigen::Matrix<double, 4, 3> l_mat;
  l_mat << -qx, -qy, -qz,
      qw, -qz, qy,
      qz, qw, -qx,
      -qy, qx, qw;
  jac_input.block<4, 3>(6, 1) = 0.5 * l_mat;
}

namespace {

// Single RK4 step with sensitivities.
ShootResult rk4_with_sensitivity(const StateVec& x0, const InputVec& u, const Vec3& fd_hat,
                                 double h, double mass) {
  StateMat jx;
  InputJacMat ju;

  const StateVec k1 = prediction_derivative(x0, u, fd_hat, mass);
  prediction_jacobians(x0, u, mass, jx, ju);
  const StateMat dk1_dx = jx;
  const InputJacMat dk1_du = ju;

  const StateVec x2 = x0 + 0.5 * h * k1;
  const StateVec k2 = prediction_derivative(x2, u, fd_hat, mass);
  prediction_jacobians(x2, u, mass, jx, ju);
  const StateMat dk2_dx = jx * (StateMat::Identity() + 0.5 * h * dk1_dx);
  const InputJacMat dk2_du = jx * (0.5 * h * dk1_du) + ju;

  const StateVec x3 = x0 + 0.5 * h * k2;
  const StateVec k3 = prediction_derivative(x3, u, fd_hat, mass);
  prediction_jacobians(x3, u, mass, jx, ju);
  const StateMat dk3_dx = jx * (StateMat::Identity() + 0.5 * h * dk2_dx);
  const InputJacMat dk3_du = jx * (0.5 * h * dk2_du) + ju;

  const StateVec x4 = x0 + h * k3;
  const StateVec k4 = prediction_derivative(x4, u, fd_hat, mass);
  prediction_jacobians(x4, u, mass, jx, ju);
  const StateMat dk4_dx = jx * (StateMat::Identity() + h * dk3_dx);
  const InputJacMat dk4_du = jx * (h * dk3_du) + ju;

  ShootResult out;
  out.x_next = x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.a = StateMat::Identity() + (h / 6.0) * (dk1_dx + 2.0 * dk2_dx + 2.0 * dk3_dx + dk4_dx);
  out.b = (h / 6.0) * (dk1_du + 2.0 * dk2_du + 2.0 * dk3_du + dk4_du);
  return out;
}

}  // namespace

ShootResult shoot(const StateVec& x0, const InputVec& u, const Vec3& fd_hat, double dt,
                  double mass, int substeps) {
  if (substeps < 1) {
    throw std::invalid_argument("shoot: substeps must be >= 1");
  }
  const double h = dt / substeps;
  ShootResult total = rk4_with_sensitivity(x0, u, fd_hat, h, mass);
  for (int i = 1; i < substeps; ++i) {
    const ShootResult step = rk4_with_sensitivity(total.x_next, u, fd_hat, h, mass);
    total.x_next = step.x_next;
    total.b = step.a * total.b + step.b;
    total.a = step.a * total.a;
  }
  return total;
}

CondensedQp build_qp(const StateVec& x_init, const std::vector<ReferencePoint>& refs,
                     const Vec3& fd_hat, const MpcWeights& weights, const MpcConfig& config,
                     const OcpSolution& linearization, double mass,
                     double initial_state_penalty) {
  const int n = config.horizon;
  if (static_cast<int>(refs.size()) != n + 1 ||
      static_cast<int>(linearization.states.size()) != n + 1 ||
      static_cast<int>(linearization.inputs.size()) != n) {
    throw std::invalid_argument("build_qp: dimension mismatch");
  }
  const bool free_x0 = initial_state_penalty > 0.0;
  const int nu = 4 * n;
  const int nv = free_x0 ? 10 + nu : nu;
  const int u_offset = free_x0 ? 10 : 0;

  CondensedQp out;
  out.free_initial_state = free_x0;
  out.a_mats.resize(n);
  out.b_mats.resize(n);
  out.free_response.assign(n + 1, StateVec::Zero());

  // Linearize the shooting dynamics and collect defects.
  std::vector<StateVec> defects(n);
  for (int k = 0; k < n; ++k) {
    const ShootResult s = shoot(linearization.states[k], linearization.inputs[k], fd_hat,
                                config.dt, mass, config.integrator_substeps);
    out.a_mats[k] = s.a;
    out.b_mats[k] = s.b;
    defects[k] = s.x_next - linearization.states[k + 1];
  }

  // Free response: state deviations with zero QP step. With the hard initial
  // condition this starts from the measurement mismatch; with the soft tie it
  // starts from zero (the x0 deviation is a decision variable).
  out.free_response[0] = free_x0 ? StateVec::Zero() : StateVec(x_init - linearization.states[0]);
  for (int k = 0; k < n; ++k) {
    out.free_response[k + 1] = out.a_mats[k] * out.free_response[k] + defects[k];
  }

  // Effect of each decision block on each node state:
  //   effect[k][0]   = d x_k / d dx0  (when free_x0)
  //   effect[k][j+b] = d x_k / d du_j
  const int blocks = free_x0 ? n + 1 : n;
  std::vector<std::vector<Eigen::Matrix<double, 10, Eigen::Dynamic>>> effect(
      static_cast<size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    effect[k].resize(static_cast<size_t>(blocks));
  }
  if (free_x0) {
    effect[0][0] = StateMat::Identity();
    for (int k = 1; k <= n; ++k) {
      effect[k][0] = out.a_mats[k - 1] * effect[k - 1][0];
    }
  }
  const int ub = free_x0 ? 1 : 0;  // index of the first input block
  for (int j = 0; j < n; ++j) {
    effect[j + 1][ub + j] = out.b_mats[j];
    for (int k = j + 2; k <= n; ++k) {
      effect[k][ub + j] = out.a_mats[k - 1] * effect[k - 1][ub + j];
    }
  }

  const StateVec stage_diag = weights.stage_state_diag();
  const StateVec terminal_diag = weights.terminal_state_diag();

  BoxQp qp;
  qp.hessian = Eigen::MatrixXd::Zero(nv, nv);
  qp.gradient = Eigen::VectorXd::Zero(nv);
  qp.lower = Eigen::VectorXd::Constant(nv, -std::numeric_limits<double>::infinity());
  qp.upper = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());

  auto block_col = [&](int block) { return block == 0 && free_x0 ? 0 : u_offset + 4 * (block - ub); };
  auto block_width = [&](int block) { return block == 0 && free_x0 ? 10 : 4; };
  auto first_node = [&](int block) {
    return block == 0 && free_x0 ? 0 : (block - ub) + 1;
  };

  for (int k = 0; k <= n; ++k) {
    const StateVec w_k = k == n ? terminal_diag : stage_diag;
    // Stage k = 0 with a hard initial condition is constant in the QP.
    if (k == 0 && !free_x0) {
      continue;
    }
    const StateVec residual =
        linearization.states[k] + out.free_response[k] - pack_reference_state(refs[k]);
    const StateVec weighted_residual = w_k.cwiseProduct(residual);
    for (int bj = 0; bj < blocks; ++bj) {
      if (first_node(bj) > k) {
        continue;
      }
      const auto& wj = effect[k][bj];
      qp.gradient.segment(block_col(bj), block_width(bj)).noalias() +=
          wj.transpose() * weighted_residual;
      for (int bi = bj; bi < blocks; ++bi) {
        if (first_node(bi) > k) {
          continue;
        }
        const auto& wi = effect[k][bi];
        qp.hessian.block(block_col(bi), block_col(bj), block_width(bi), block_width(bj))
            .noalias() += wi.transpose() * w_k.asDiagonal() * wj;
      }
    }
  }

  // Input regularization and bounds.
  for (int j = 0; j < n; ++j) {
    const int c = u_offset + 4 * j;
    const InputVec du_ref = linearization.inputs[j] - pack_reference_input(refs[j]);
    for (int i = 0; i < 4; ++i) {
      qp.hessian(c + i, c + i) += weights.r_input[i];
      qp.gradient[c + i] += weights.r_input[i] * du_ref[i];
    }
    qp.lower[c] = config.thrust_min - linearization.inputs[j][0];
    qp.upper[c] = config.thrust_max - linearization.inputs[j][0];
    for (int i = 1; i < 4; ++i) {
      qp.lower[c + i] = -config.omega_max - linearization.inputs[j][i];
      qp.upper[c + i] = config.omega_max - linearization.inputs[j][i];
    }
  }

  if (free_x0) {
    const StateVec tie = linearization.states[0] - x_init;
    for (int i = 0; i < 10; ++i) {
      qp.hessian(i, i) += initial_state_penalty;
      qp.gradient[i] += initial_state_penalty * tie[i];
    }
  }

  // Mirror the upper triangle.
  qp.hessian = qp.hessian.selfadjointView<Eigen::Lower>();
  out.qp = std::move(qp);
  return out;
}

OcpSolution shift_warm_start(const OcpSolution& sol, const Vec3& fd_hat, double dt, double mass,
                             int substeps) {
  const size_t n = sol.inputs.size();
  if (sol.states.size() != n + 1 || n == 0) {
    throw std::invalid_argument("shift_warm_start: malformed solution");
  }
  OcpSolution out = sol;
  for (size_t k = 0; k + 1 < n; ++k) {
    out.inputs[k] = sol.inputs[k + 1];
  }
  // Last-stage input duplicated.
  out.inputs[n - 1] = sol.inputs[n - 1];
  for (size_t k = 0; k < n; ++k) {
    out.states[k] = sol.states[k + 1];
  }
  out.states[n] = shoot(out.states[n - 1], out.inputs[n - 1], fd_hat, dt, mass, substeps).x_next;
  return out;
}

double trajectory_objective(const OcpSolution& traj, const std::vector<ReferencePoint>& refs,
                            const MpcWeights& weights) {
  const size_t n = traj.inputs.size();
  const StateVec stage_diag = weights.stage_state_diag();
  const StateVec terminal_diag = weights.terminal_state_diag();
  double cost = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const StateVec dx = traj.states[k] - pack_reference_state(refs[k]);
    const InputVec du = traj.inputs[k] - pack_reference_input(refs[k]);
    cost += dx.dot(stage_diag.cwiseProduct(dx));
    for (int i = 0; i < 4; ++i) {
      cost += weights.r_input[i] * du[i] * du[i];
    }
  }
  const StateVec dxn = traj.states[n] - pack_reference_state(refs[n]);
  cost += dxn.dot(terminal_diag.cwiseProduct(dxn));
  return cost;
}

MpcController::MpcController(const MpcWeights& weights, const MpcConfig& config, double mass)
    : weights_(weights), config_(config), mass_(mass) {
  if (config_.horizon < 1 || config_.dt <= 0.0 || config_.thrust_min < 0.0) {
    throw std::invalid_argument("MpcController: invalid configuration");
  }
  reset();
}

void MpcController::reset() {
  solution_ = OcpSolution{};
  initialized_ = false;
  steps_since_shift_ = 0;
  fallback_u0_.setZero();
}

MpcController::StepResult MpcController::step(const QuadState& measured, const Vec3& fd_hat,
                                              const std::vector<ReferencePoint>& refs) {
  const int n = config_.horizon;
  if (static_cast<int>(refs.size()) != n + 1) {
    throw std::invalid_argument("MpcController::step: expected horizon+1 references");
  }

  QuadState meas = measured;
  meas.attitude = quat_align_sign(refs[0].attitude, meas.attitude);
  const StateVec x_meas = pack_state(meas);

  if (!initialized_) {
    // Cold start: the reference trajectory is the linearization point.
    solution_.states.resize(static_cast<size_t>(n) + 1);
    solution_.inputs.resize(static_cast<size_t>(n));
    for (int k = 0; k <= n; ++k) {
      solution_.states[k] = pack_reference_state(refs[k]);
    }
    for (int k = 0; k < n; ++k) {
      InputVec u = pack_reference_input(refs[k]);
      u[0] = std::clamp(u[0], config_.thrust_min, config_.thrust_max);
      for (int i = 1; i < 4; ++i) {
        u[i] = std::clamp(u[i], -config_.omega_max, config_.omega_max);
      }
      solution_.inputs[k] = u;
    }
    initialized_ = true;
    steps_since_shift_ = 0;
  } else if (++steps_since_shift_ >= config_.steps_per_shift) {
    solution_ = shift_warm_start(solution_, fd_hat, config_.dt, mass_,
                                 config_.integrator_substeps);
    steps_since_shift_ = 0;
  }

  StepResult result;
  try {
    for (int it = 0; it < config_.iterations; ++it) {
      CondensedQp cqp = build_qp(x_meas, refs, fd_hat, weights_, config_, solution_, mass_,
                                 initial_state_penalty_);
      const QpSolution qps =
          solve_box_qp(cqp.qp, Eigen::VectorXd::Zero(cqp.qp.size()), config_.qp_max_iterations);
      if (qps.status == QpStatus::kMaxIterations ||
          qps.kkt_residual > config_.kkt_tolerance) {
        result.degraded = true;
      }

      // Expand the condensed step back onto the trajectory (full step).
      const int u_offset = cqp.free_initial_state ? 10 : 0;
      StateVec dx = cqp.free_initial_state
                        ? StateVec(qps.x.segment<10>(0))
                        : StateVec(x_meas - solution_.states[0]);
      solution_.states[0] += dx;
      for (int k = 0; k < n; ++k) {
        const InputVec du = qps.x.segment<4>(u_offset + 4 * k);
        dx = cqp.a_mats[k] * dx + cqp.b_mats[k] * du +
             (cqp.free_response[k + 1] - cqp.a_mats[k] * cqp.free_response[k]);
        solution_.inputs[k] += du;
        solution_.states[k + 1] += dx;
      }
      solution_.kkt_residual = qps.kkt_residual;
      solution_.status = qps.status;
    }
  } catch (const std::exception&) {
    // Hard solver failure: fall back to the shifted previous input.
    result.u0 = initialized_ && !solution_.inputs.empty() ? solution_.inputs[0] : fallback_u0_;
    result.degraded = true;
    return result;
  }

  solution_.objective = trajectory_objective(solution_, refs, weights_);

  InputVec u0 = solution_.inputs[0];
  u0[0] = std::clamp(u0[0], config_.thrust_min, config_.thrust_max);
  for (int i = 1; i < 4; ++i) {
    u0[i] = std::clamp(u0[i], -config_.omega_max, config_.omega_max);
  }
  result.u0 = u0;
  fallback_u0_ = u0;
  return result;
}

}  // namespace quadfx

#include "quadfx/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadfx {

namespace {

void check_state(const QuadState& s) {
  if (std::abs(s.attitude.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("plant: attitude quaternion not unit");
  }
  if (!s.position.allFinite() || !s.velocity.allFinite() || !s.omega.allFinite()) {
    throw std::invalid_argument("plant: non-finite state");
  }
}

void check_wrench(const Wrench& w, const QuadParams& p) {
  if (w.thrust < -1e-9 || w.thrust > p.max_thrust() + 1e-9) {
    throw std::invalid_argument("plant: thrust outside [0, T_max]");
  }
  for (int i = 0; i < 3; ++i) {
    if (std::abs(w.torque[i]) > p.torque_limits[i] + 1e-9) {
      throw std::invalid_argument("plant: torque outside limits");
    }
  }
}

}  // namespace

namespace {

// Shared body: the RK4 stages evaluate this on intermediate states whose
// quaternion norm drifts by O(h^2), which must not trip the strict entry
// check.
StateDerivative derivative_unchecked(const QuadState& state, const Wrench& wrench,
                                     const Vec3& f_d, const Vec3& tau_d,
                                     const QuadParams& params) {
  const Vec3 gravity(0.0, 0.0, kGravity);
  const Mat3 R = quat_to_rotation(quat_normalize(state.attitude));

  StateDerivative d;
  d.position_dot = state.velocity;
  d.velocity_dot = -(wrench.thrust / params.mass) * R.col(2) + gravity + f_d / params.mass;
  d.attitude_dot = quat_derivative(state.attitude, state.omega);
  const Vec3 J = params.inertia_diag;
  const Vec3 J_omega = J.cwiseProduct(state.omega);
  const Vec3 torque_net = wrench.torque - state.omega.cross(J_omega) + tau_d;
  d.omega_dot = torque_net.cwiseQuotient(J);
  return d;
}

}  // namespace

StateDerivative dynamics_derivative(const QuadState& state, const Wrench& wrench,
                                    const Vec3& f_d, const Vec3& tau_d,
                                    const QuadParams& params) {
  check_state(state);
  check_wrench(wrench, params);
  return derivative_unchecked(state, wrench, f_d, tau_d, params);
}

namespace {

QuadState advance(const QuadState& s, const StateDerivative& d, double h) {
  QuadState out;
  out.position = s.position + h * d.position_dot;
  out.velocity = s.velocity + h * d.velocity_dot;
  out.attitude = Quat::from_coeffs(s.attitude.coeffs() + h * d.attitude_dot);
  out.omega = s.omega + h * d.omega_dot;
  return out;
}

}  // namespace

QuadState rk4_step(const QuadState& state, const Wrench& wrench, const Vec3& f_d,
                   const Vec3& tau_d, const QuadParams& params, double h) {
  if (!(h > 0.0 && h <= 0.01)) {
    throw std::invalid_argument("rk4_step: h must lie in (0, 0.01]");
  }
  check_state(state);
  check_wrench(wrench, params);
  const StateDerivative k1 = derivative_unchecked(state, wrench, f_d, tau_d, params);
  const QuadState s2 = advance(state, k1, 0.5 * h);
  const StateDerivative k2 = derivative_unchecked(s2, wrench, f_d, tau_d, params);
  const QuadState s3 = advance(state, k2, 0.5 * h);
  const StateDerivative k3 = derivative_unchecked(s3, wrench, f_d, tau_d, params);
  const QuadState s4 = advance(state, k3, h);
  const StateDerivative k4 = derivative_unchecked(s4, wrench, f_d, tau_d, params);

  QuadState out;
  out.position = state.position +
                 (h / 6.0) * (k1.position_dot + 2.0 * k2.position_dot +
                              2.0 * k3.position_dot + k4.position_dot);
  out.velocity = state.velocity +
                 (h / 6.0) * (k1.velocity_dot + 2.0 * k2.velocity_dot +
                              2.0 * k3.velocity_dot + k4.velocity_dot);
  out.attitude = Quat::from_coeffs(
      state.attitude.coeffs() + (h / 6.0) * (k1.attitude_dot + 2.0 * k2.attitude_dot +
                                             2.0 * k3.attitude_dot + k4.attitude_dot));
  out.omega = state.omega + (h / 6.0) * (k1.omega_dot + 2.0 * k2.omega_dot +
                                         2.0 * k3.omega_dot + k4.omega_dot);
  out.attitude = quat_normalize(out.attitude);
  return out;
}

Wrench mix_motors(const std::array<double, 4>& t, const QuadParams& p) {
  for (double ti : t) {
    if (ti < 0.0) {
      throw std::invalid_argument("mix_motors: negative rotor thrust");
    }
  }
  Wrench w;
  w.thrust = t[0] + t[1] + t[2] + t[3];
  w.torque = Vec3(p.rotor_dy * (-t[0] - t[1] + t[2] + t[3]),
                  p.rotor_dx * (-t[0] + t[1] + t[2] - t[3]),
                  p.drag_torque_coeff * (-t[0] + t[1] - t[2] + t[3]));
  return w;
}

MotorAllocation allocate_motors(const Wrench& w, const QuadParams& p) {
  // The 4x4 mixer has orthogonal sign columns; its inverse is closed-form.
  const double dy = p.rotor_dy, dx = p.rotor_dx, ct = p.drag_torque_coeff;
  const double T = w.thrust;
  const double tx = w.torque.x() / dy;
  const double ty = w.torque.y() / dx;
  const double tz = w.torque.z() / ct;

  MotorAllocation out;
  out.thrusts = {0.25 * (T - tx - ty - tz), 0.25 * (T - tx + ty + tz),
                 0.25 * (T + tx + ty - tz), 0.25 * (T + tx - ty + tz)};
  const double t_max = p.max_single_thrust();
  for (double& ti : out.thrusts) {
    const double clamped = std::clamp(ti, 0.0, t_max);
    if (std::abs(clamped - ti) > 1e-12) {
      out.saturated = true;
    }
    ti = clamped;
  }
  return out;
}

Wrench saturate_wrench(const Wrench& w, const QuadParams& p) {
  Wrench out;
  out.thrust = std::clamp(w.thrust, 0.0, p.max_thrust());
  for (int i = 0; i < 3; ++i) {
    out.torque[i] = std::clamp(w.torque[i], -p.torque_limits[i], p.torque_limits[i]);
  }
  return out;
}

}  // namespace quadfx

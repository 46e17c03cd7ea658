#include "quadfx/reference.hpp"

#include <cmath>
#include <stdexcept>

#include "quadfx/plant.hpp"

namespace quadfx {

FlatOutput eight_trajectory(double t, const EightTrajectoryParams& prm) {
  // theta = kt t^2; p_x = (rx/2) sin(2 theta), p_y = ry (cos theta - 1).
  const double theta = prm.kt * t * t;
  const double theta_d = 2.0 * prm.kt * t;
  const double theta_dd = 2.0 * prm.kt;  // third derivative of theta is zero

  const double s = std::sin(theta), c = std::cos(theta);
  const double s2 = std::sin(2.0 * theta), c2 = std::cos(2.0 * theta);

  FlatOutput f;
  f.position = Vec3(0.5 * prm.rx * s2, prm.ry * (c - 1.0), prm.rz);
  f.velocity = Vec3(prm.rx * theta_d * c2, -prm.ry * theta_d * s, 0.0);
  f.acceleration = Vec3(prm.rx * (theta_dd * c2 - 2.0 * theta_d * theta_d * s2),
                        -prm.ry * (theta_dd * s + theta_d * theta_d * c), 0.0);
  f.jerk = Vec3(prm.rx * (-6.0 * theta_d * theta_dd * s2 - 4.0 * theta_d * theta_d * theta_d * c2),
                -prm.ry * (3.0 * theta_d * theta_dd * c - theta_d * theta_d * theta_d * s), 0.0);
  f.yaw = 0.0;
  f.yaw_rate = 0.0;
  return f;
}

FlatOutput hover_reference(const Vec3& p_hover) {
  FlatOutput f;
  f.position = p_hover;
  return f;
}

ReferencePoint flat_to_reference(const FlatOutput& flat, double mass) {
  const Vec3 gravity(0.0, 0.0, kGravity);

  // Thrust vector in world coordinates: the translational dynamics give
  // a = -(T/m) z_B + g, so z_B must point along (g - a_r).
  const Vec3 thrust_vec = mass * (gravity - flat.acceleration);
  const double thrust = thrust_vec.norm();
  if (thrust < 1e-6) {
    throw std::invalid_argument("flat_to_reference: free-fall reference (thrust ~ 0)");
  }
  const Vec3 z_b = thrust_vec / thrust;

  // Heading construction: body x is made orthogonal to the yaw-rotated
  // east axis, which keeps the extracted heading of x_B exactly at the
  // commanded yaw for any tilt.
  const Vec3 y_c(-std::sin(flat.yaw), std::cos(flat.yaw), 0.0);
  Vec3 x_b = y_c.cross(z_b);
  const double x_norm = x_b.norm();
  if (x_norm < 1e-9) {
    throw std::invalid_argument("flat_to_reference: degenerate attitude (roll at +-90 deg)");
  }
  x_b /= x_norm;
  const Vec3 y_b = z_b.cross(x_b);

  Mat3 R;
  R.col(0) = x_b;
  R.col(1) = y_b;
  R.col(2) = z_b;

  ReferencePoint ref;
  ref.position = flat.position;
  ref.velocity = flat.velocity;
  ref.attitude = quat_from_rotation(R);
  ref.thrust = thrust;

  // Body rates from the jerk: d/dt z_B = -(I - z_B z_B^T) jerk / |g - a|,
  // and R^T zdot_B = (omega_y, -omega_x, 0).
  const double specific_thrust = thrust / mass;  // |g - a_r|
  const Vec3 z_b_dot = -(Mat3::Identity() - z_b * z_b.transpose()) * flat.jerk / specific_thrust;
  const Vec3 body_rate_xy = R.transpose() * z_b_dot;
  ref.omega = Vec3(-body_rate_xy.y(), body_rate_xy.x(), flat.yaw_rate * z_b.z());
  ref.omega_dot = Vec3::Zero();
  return ref;
}

std::vector<ReferencePoint> sample_horizon(const FlatTrajectory& traj, double t0, int n,
                                           double dt, double mass) {
  if (n < 1) {
    throw std::invalid_argument("sample_horizon: n must be >= 1");
  }
  std::vector<ReferencePoint> refs;
  refs.reserve(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    ReferencePoint r = flat_to_reference(traj(t0 + k * dt), mass);
    if (!refs.empty()) {
      r.attitude = quat_align_sign(refs.back().attitude, r.attitude);
    }
    refs.push_back(r);
  }
  return refs;
}

}  // namespace quadfx

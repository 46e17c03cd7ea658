#ifndef QUADFX_CORE_MATH_HPP
#define QUADFX_CORE_MATH_HPP

#include <Eigen/Dense>

namespace quadfx {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion, scalar-first (w, x, y, z). World/body frames are NED:
/// x north, y east, z down; body z points down through the belly of the
/// vehicle, so thrust acts along -z_B.
struct Quat {
  double w{1.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

  Vec4 coeffs() const { return {w, x, y, z}; }
  static Quat from_coeffs(const Vec4& c) { return {c[0], c[1], c[2], c[3]}; }
};

/// Multivariable signed power: |x|^a * (x / |x|) for x != 0, and the zero
/// vector at x = 0 (for every a, including a = 0 where the map is the
/// multivariable signum x/|x| with the selection 0 at the origin).
Vec3 signed_power(const Vec3& x, double a);

/// Rotation matrix from body to world frame. The quaternion must be unit
/// within 1e-6 or an std::invalid_argument is thrown.
Mat3 quat_to_rotation(const Quat& q);

/// Quaternion kinematics: 0.5 * q (x) [0, omega], with omega the body
/// angular rate in rad/s. Returned as (w, x, y, z) derivative components.
Vec4 quat_derivative(const Quat& q, const Vec3& omega);

/// Hamilton product q (x) r.
Quat quat_multiply(const Quat& q, const Quat& r);

Quat quat_conjugate(const Quat& q);

/// Rescales to unit norm; throws std::invalid_argument when the norm is
/// below 1e-12.
Quat quat_normalize(const Quat& q);

/// Resolves the double cover: returns q_ref when dot(q, q_ref) >= 0 and
/// -q_ref otherwise, so the returned representative always satisfies
/// dot(q, result) >= 0. Ties (dot exactly 0) keep +q_ref.
Quat quat_align_sign(const Quat& q, const Quat& q_ref);

/// Quaternion from a rotation matrix (assumed orthonormal), scalar part
/// chosen non-negative.
Quat quat_from_rotation(const Mat3& R);

/// Yaw (heading about world z) of the body x-axis, in radians.
double quat_yaw(const Quat& q);

}  // namespace quadfx

#endif  // QUADFX_CORE_MATH_HPP

#include "quadfx/core_math.hpp"

#include <cmath>
#include <stdexcept>

namespace quadfx {

Vec3 signed_power(const Vec3& x, double a) {
  const double n = x.norm();
  if (n == 0.0) {
    return Vec3::Zero();
  }
  // |x|^a * unit(x); written as |x|^(a-1) * x to avoid the division for a >= 1.
  return std::pow(n, a - 1.0) * x;
}

Mat3 quat_to_rotation(const Quat& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("quat_to_rotation: quaternion norm deviates from 1 beyond 1e-6");
  }
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (w * y + x * z),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (w * x + y * z), 1 - 2 * (x * x + y * y);
  return R;
}

Vec4 quat_derivative(const Quat& q, const Vec3& omega) {
  const double wx = omega.x(), wy = omega.y(), wz = omega.z();
  return 0.5 * Vec4(-wx * q.x - wy * q.y - wz * q.z,
                    wx * q.w + wz * q.y - wy * q.z,
                    wy * q.w - wz * q.x + wx * q.z,
                    wz * q.w + wy * q.x - wx * q.y);
}

Quat quat_multiply(const Quat& q, const Quat& r) {
  return {q.w * r.w - q.x * r.x - q.y * r.y - q.z * r.z,
          q.w * r.x + q.x * r.w + q.y * r.z - q.z * r.y,
          q.w * r.y - q.x * r.z + q.y * r.w + q.z * r.x,
          q.w * r.z + q.x * r.y - q.y * r.x + q.z * r.w};
}

Quat quat_conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

Quat quat_normalize(const Quat& q) {
  const double n = q.norm();
  if (n < 1e-12) {
    throw std::invalid_argument("quat_normalize: norm below 1e-12");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quat quat_align_sign(const Quat& q, const Quat& q_ref) {
  if (q.dot(q_ref) >= 0.0) {
    return q_ref;
  }
  return {-q_ref.w, -q_ref.x, -q_ref.y, -q_ref.z};
}

Quat quat_from_rotation(const Mat3& R) {
  // Shepperd's method: pick the largest diagonal combination for stability.
  const double tr = R.trace();
  Quat q;
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (R(2, 1) - R(1, 2)) / s;
    q.y = (R(0, 2) - R(2, 0)) / s;
    q.z = (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2.0;
    q.w = (R(2, 1) - R(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (R(0, 1) + R(1, 0)) / s;
    q.z = (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2.0;
    q.w = (R(0, 2) - R(2, 0)) / s;
    q.x = (R(0, 1) + R(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (R(1, 2) + R(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2.0;
    q.w = (R(1, 0) - R(0, 1)) / s;
    q.x = (R(0, 2) + R(2, 0)) / s;
    q.y = (R(1, 2) + R(2, 1)) / s;
    q.z = 0.25 * s;
  }
  if (q.w < 0.0) {
    q = {-q.w, -q.x, -q.y, -q.z};
  }
  return quat_normalize(q);
}

double quat_yaw(const Quat& q) {
  // Heading of the body x-axis projected on the world xy-plane.
  const Mat3 R = quat_to_rotation(quat_normalize(q));
  return std::atan2(R(1, 0), R(0, 0));
}

}  // namespace quadfx

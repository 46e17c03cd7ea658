#ifndef QUADFX_DISTURBANCE_HPP
#define QUADFX_DISTURBANCE_HPP

#include "quadfx/core_math.hpp"

namespace quadfx {

struct DisturbanceSample {
  Vec3 force{Vec3::Zero()};   // N, world
  Vec3 torque{Vec3::Zero()};  // N m, body
};

/// Sinusoidal force/torque pair with a 15 s period, evaluated at the time
/// since activation. Returns zero for dt < 0.
DisturbanceSample sinusoid_disturbance(double dt_since_activation);

/// Constant force (no torque) after activation.
DisturbanceSample constant_disturbance(double dt_since_activation, const Vec3& f0);

/// Ground-truth disturbance generator. `scale` multiplies the force only
/// (torque is left untouched); activation gates the output to exactly zero
/// before `activation_time`.
struct DisturbanceProfile {
  enum class Kind { None, Sinusoid, Constant };

  Kind kind{Kind::None};
  double activation_time{0.0};       // s, absolute run time
  double scale{1.0};                 // in [0, 1], force-only
  Vec3 constant_force{Vec3::Zero()};

  static DisturbanceProfile none();
  static DisturbanceProfile sinusoid(double activation_time);
  static DisturbanceProfile constant(double activation_time, const Vec3& f0);

  /// Same profile with the force scaled by k in [0, 1].
  DisturbanceProfile scaled(double k) const;

  DisturbanceSample at(double t) const;

  /// Analytic supremum of |d f_d / dt| after activation. Throws
  /// std::invalid_argument for an unsupported kind.
  double force_derivative_bound() const;

  /// Peak force magnitude after activation (used for observer bands).
  double force_amplitude() const;
};

}  // namespace quadfx

#endif  // QUADFX_DISTURBANCE_HPP

#ifndef QUADFX_INNER_LOOP_HPP
#define QUADFX_INNER_LOOP_HPP

#include "quadfx/core_math.hpp"

namespace quadfx {

/// Second-order low-pass built from two cascaded exactly-discretized
/// first-order sections (critically damped).
class SecondOrderLowpass {
 public:
  SecondOrderLowpass() = default;
  SecondOrderLowpass(double cutoff_hz, double sample_time);

  void reset(const Vec3& value = Vec3::Zero());
  Vec3 step(const Vec3& input);
  Vec3 value() const { return stage2_; }

 private:
  double alpha_{1.0};
  Vec3 stage1_{Vec3::Zero()};
  Vec3 stage2_{Vec3::Zero()};
};

struct IndiGains {
  Vec3 k_omega{400.0, 400.0, 300.0};  // 1/s
};

/// Incremental angular-rate controller: the torque command is the filtered
/// previous command plus J times the angular-acceleration increment, which
/// absorbs slowly-varying torque disturbances without modeling them. The
/// angular-acceleration feedback comes from first differences of the rate
/// measurement low-passed at the configured cutoff; the identical filter on
/// the torque path keeps the increment bias-free.
class IndiController {
 public:
  IndiController(const IndiGains& gains, const Vec3& inertia_diag, const Vec3& torque_limits,
                 double filter_cutoff_hz, double sample_time);

  /// One 1 kHz update. omega_meas is the raw rate measurement used both for
  /// the proportional error and (differenced) for the acceleration feedback.
  Vec3 step(const Vec3& omega_meas, const Vec3& omega_cmd, const Vec3& omega_dot_ref);

  void reset();

  /// Test mode: bypasses both filters and uses the supplied exact angular
  /// acceleration, turning the closed loop into a pure first-order system.
  void set_exact_acceleration(bool enabled) { exact_acceleration_ = enabled; }
  void supply_exact_acceleration(const Vec3& omega_dot) { exact_omega_dot_ = omega_dot; }

 private:
  IndiGains gains_;
  Vec3 inertia_;
  Vec3 torque_limits_;
  double sample_time_;
  SecondOrderLowpass accel_filter_;
  SecondOrderLowpass torque_filter_;
  Vec3 prev_omega_{Vec3::Zero()};
  bool have_prev_{false};
  bool exact_acceleration_{false};
  Vec3 exact_omega_dot_{Vec3::Zero()};
};

}  // namespace quadfx

#endif  // QUADFX_INNER_LOOP_HPP

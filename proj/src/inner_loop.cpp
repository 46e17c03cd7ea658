#include "quadfx/inner_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quadfx {

SecondOrderLowpass::SecondOrderLowpass(double cutoff_hz, double sample_time) {
  if (cutoff_hz <= 0.0 || sample_time <= 0.0) {
    throw std::invalid_argument("SecondOrderLowpass: cutoff and sample time must be positive");
  }
  alpha_ = 1.0 - std::exp(-2.0 * std::numbers::pi * cutoff_hz * sample_time);
}

void SecondOrderLowpass::reset(const Vec3& value) {
  stage1_ = value;
  stage2_ = value;
}

Vec3 SecondOrderLowpass::step(const Vec3& input) {
  stage1_ += alpha_ * (input - stage1_);
  stage2_ += alpha_ * (stage1_ - stage2_);
  return stage2_;
}

IndiController::IndiController(const IndiGains& gains, const Vec3& inertia_diag,
                               const Vec3& torque_limits, double filter_cutoff_hz,
                               double sample_time)
    : gains_(gains),
      inertia_(inertia_diag),
      torque_limits_(torque_limits),
      sample_time_(sample_time),
      accel_filter_(filter_cutoff_hz, sample_time),
      torque_filter_(filter_cutoff_hz, sample_time) {
  if ((gains_.k_omega.array() <= 0.0).any() || (inertia_.array() <= 0.0).any()) {
    throw std::invalid_argument("IndiController: gains and inertia must be positive");
  }
}

void IndiController::reset() {
  accel_filter_.reset();
  torque_filter_.reset();
  prev_omega_.setZero();
  have_prev_ = false;
}

Vec3 IndiController::step(const Vec3& omega_meas, const Vec3& omega_cmd,
                          const Vec3& omega_dot_ref) {
  Vec3 omega_dot_f;
  if (exact_acceleration_) {
    omega_dot_f = exact_omega_dot_;
  } else {
    const Vec3 diff = have_prev_ ? Vec3((omega_meas - prev_omega_) / sample_time_) : Vec3::Zero();
    omega_dot_f = accel_filter_.step(diff);
  }
  prev_omega_ = omega_meas;
  have_prev_ = true;

  const Vec3 omega_dot_cmd = gains_.k_omega.cwiseProduct(omega_cmd - omega_meas) + omega_dot_ref;

  Vec3 torque = torque_filter_.value() + inertia_.cwiseProduct(omega_dot_cmd - omega_dot_f);

  // Saturate, then feed the saturated command back through the matched
  // filter (anti-windup).
  for (int i = 0; i < 3; ++i) {
    torque[i] = std::clamp(torque[i], -torque_limits_[i], torque_limits_[i]);
  }
  if (exact_acceleration_) {
    // Bypass the filter lag in test mode so the increment uses the exact
    // previous command.
    torque_filter_.reset(torque);
  } else {
    torque_filter_.step(torque);
  }
  return torque;
}

}  // namespace quadfx

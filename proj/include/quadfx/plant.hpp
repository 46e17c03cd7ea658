#ifndef QUADFX_PLANT_HPP
#define QUADFX_PLANT_HPP

#include <array>

#include "quadfx/core_math.hpp"

namespace quadfx {

inline constexpr double kGravity = 9.81;  // m/s^2, NED +z

struct QuadParams {
  double mass{1.0};                              // kg
  Vec3 inertia_diag{2.64e-3, 2.64e-3, 4.96e-3};  // kg m^2, principal axes
  double arm_length{0.17};                       // m
  double thrust_to_weight{4.0};
  Vec3 torque_limits{0.5, 0.5, 0.5};  // N m, per axis
  // Mixer geometry. The nominal data sheet lists d_x = d_y = 9.4e-9 and
  // c_T = 2.5e-9, which cannot be meter-scale displacements; we derive the
  // displacements from the arm length (X layout) and use a typical
  // drag-to-thrust ratio instead.
  double rotor_dx{0.17 / 1.4142135623730951};
  double rotor_dy{0.17 / 1.4142135623730951};
  double drag_torque_coeff{0.013};  // m
  bool use_motor_allocation{false};

  double max_thrust() const { return thrust_to_weight * mass * kGravity; }
  double max_single_thrust() const { return max_thrust() / 4.0; }
};

struct QuadState {
  Vec3 position{Vec3::Zero()};   // m, world NED
  Vec3 velocity{Vec3::Zero()};   // m/s, world
  Quat attitude{};               // body -> world
  Vec3 omega{Vec3::Zero()};      // rad/s, body
};

/// Collective thrust (N, >= 0) plus body torque (N m).
struct Wrench {
  double thrust{0.0};
  Vec3 torque{Vec3::Zero()};
};

struct StateDerivative {
  Vec3 position_dot;
  Vec3 velocity_dot;
  Vec4 attitude_dot;  // (w, x, y, z)
  Vec3 omega_dot;
};

/// Rigid-body derivative with lumped force disturbance f_d (world, N) and
/// torque disturbance tau_d (body, N m). Throws std::invalid_argument when
/// the state or wrench violates its invariants.
StateDerivative dynamics_derivative(const QuadState& state, const Wrench& wrench,
                                    const Vec3& f_d, const Vec3& tau_d,
                                    const QuadParams& params);

/// Classical RK4 step with inputs and disturbances held constant over h,
/// followed by quaternion renormalization. h must lie in (0, 0.01].
QuadState rk4_step(const QuadState& state, const Wrench& wrench, const Vec3& f_d,
                   const Vec3& tau_d, const QuadParams& params, double h);

/// Thrust/torque mixing from the four rotor thrusts (N, >= 0).
/// Rotor order: 0 front-left, 1 back-left, 2 back-right, 3 front-right,
/// matching the signs of the mixer matrix.
Wrench mix_motors(const std::array<double, 4>& thrusts, const QuadParams& params);

struct MotorAllocation {
  std::array<double, 4> thrusts;
  bool saturated{false};
};

/// Pseudo-inverse of the mixer with per-rotor clamping to [0, T_max/4].
/// Round-trips exactly through mix_motors when the wrench is reachable.
MotorAllocation allocate_motors(const Wrench& wrench, const QuadParams& params);

/// Clamps thrust to [0, thrust_to_weight * m * g] and torque to the
/// per-axis limits.
Wrench saturate_wrench(const Wrench& wrench, const QuadParams& params);

}  // namespace quadfx

#endif  // QUADFX_PLANT_HPP

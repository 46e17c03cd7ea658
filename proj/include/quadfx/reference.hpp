#ifndef QUADFX_REFERENCE_HPP
#define QUADFX_REFERENCE_HPP

#include <functional>
#include <vector>

#include "quadfx/core_math.hpp"

namespace quadfx {

/// Flat outputs (position and yaw) with the derivatives needed to build
/// full state/input references: velocity, acceleration, jerk and yaw rate.
struct FlatOutput {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Vec3 acceleration{Vec3::Zero()};
  Vec3 jerk{Vec3::Zero()};
  double yaw{0.0};
  double yaw_rate{0.0};
};

/// Reference state and input at one horizon node.
struct ReferencePoint {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Quat attitude{};
  double thrust{0.0};            // N
  Vec3 omega{Vec3::Zero()};      // rad/s, body
  Vec3 omega_dot{Vec3::Zero()};  // rad/s^2 (zero for the slow trajectories here)
};

struct EightTrajectoryParams {
  double rx{3.0};   // m
  double ry{5.0};   // m
  double rz{-1.0};  // m
  double kt{0.01};  // 1/s^2
};

/// Figure-eight: p = [rx sin(kt t^2) cos(kt t^2), ry cos(kt t^2) - ry, rz],
/// yaw = 0, with analytic derivatives.
FlatOutput eight_trajectory(double t, const EightTrajectoryParams& params);

/// Constant hover point, all derivatives zero, yaw 0.
FlatOutput hover_reference(const Vec3& p_hover);

/// Differential-flatness map from flat outputs to a full reference point.
/// The body z-axis is oriented along (g - a_r)/|g - a_r| so that the
/// translational dynamics reproduce a_r exactly with thrust |m (g - a_r)|;
/// body rates come from the jerk. Throws std::invalid_argument for a
/// free-fall reference (|g - a_r| < 1e-6).
ReferencePoint flat_to_reference(const FlatOutput& flat, double mass);

using FlatTrajectory = std::function<FlatOutput(double)>;

/// References at t0, t0+dt, ..., t0+n*dt (n+1 points) with quaternion sign
/// continuity between consecutive nodes.
std::vector<ReferencePoint> sample_horizon(const FlatTrajectory& traj, double t0, int n,
                                           double dt, double mass);

}  // namespace quadfx

#endif  // QUADFX_REFERENCE_HPP

#ifndef QUADFX_OBSERVERS_HPP
#define QUADFX_OBSERVERS_HPP

#include "quadfx/core_math.hpp"

namespace quadfx {

/// Gains of the fixed-time disturbance observer. The correction functions
/// are built from three signed powers each:
///   phi1(e) = k1 |e|^(1/2) + k1p e + k1pp |e|^(1/(1-d_inf))
///   phi2(e) = k2 sgn(e)    + k2p e + k2pp |e|^((1+d_inf)/(1-d_inf))
/// (signed powers act along e). The 0-limit terms give finite-time
/// convergence near the origin; the terms with exponents above one bound
/// the convergence time from large initial errors, which together yield a
/// fixed convergence time independent of the initial estimation error.
struct FxtdoGains {
  double k1{2.0};
  double k2{2.0};
  double k1p{0.6};
  double k2p{0.6};
  double k1pp{3.0};
  double k2pp{3.0};
  double d_inf{1.0 / 3.0};  // in (0, 1)
  double l1{1.0};
  double l2{1.0};
  /// Optional half-width of a linear interval replacing the discontinuous
  /// signum term near e = 0 (0 keeps it exact).
  double signum_boundary_layer{0.0};

  bool valid() const {
    return k1 > 0 && k2 > 0 && k1p > 0 && k2p > 0 && k1pp > 0 && k2pp > 0 &&
           d_inf > 0 && d_inf < 1 && l1 > 0 && l2 > 0 && signum_boundary_layer >= 0;
  }
};

/// High-gain disturbance observer baseline: linear corrections alpha1/eps
/// and alpha2/eps^2.
struct HgdoGains {
  double alpha1{3.0};
  double alpha2{2.0};
  double eps{0.2};

  bool valid() const { return alpha1 > 0 && alpha2 > 0 && eps > 0; }
};

/// Internal observer state: momentum estimate and disturbance estimate.
struct ObserverState {
  Vec3 z1_hat{Vec3::Zero()};  // kg m/s
  Vec3 fd_hat{Vec3::Zero()};  // N
};

/// Virtual input of the momentum-level model z1 = m v:
/// T = m g - R(q) T_c e_z. The commanded (post-saturation) thrust is used.
Vec3 virtual_input(const Quat& q, double thrust, double mass);

Vec3 phi1(const Vec3& e1, const FxtdoGains& gains);
Vec3 phi2(const Vec3& e1, const FxtdoGains& gains);

/// One explicit-Euler step of the fixed-time observer with the innovation
/// e1 = z1_meas - z1_hat held over the step. h must lie in (0, 0.01].
ObserverState fxtdo_step(const ObserverState& st, const Vec3& z1_meas, const Vec3& virtual_u,
                         const FxtdoGains& gains, double h);

/// One explicit-Euler step of the high-gain observer baseline.
ObserverState hgdo_step(const ObserverState& st, const Vec3& z1_meas, const Vec3& virtual_u,
                        const HgdoGains& gains, double h);

/// Report of the observer gain condition L2 > delta_bar / k2 against a
/// disturbance derivative bound. The companion condition on L1 involves a
/// maximization over a homogeneous sphere with no computable recipe; L1 is
/// treated as a tunable and only reported.
struct GainCheckReport {
  double fdot_bound{0.0};       // delta_bar
  double l2_times_k2{0.0};
  double margin{0.0};           // L2 k2 - delta_bar
  bool l2_condition_ok{false};
  double l1{0.0};               // echoed, not verified
};

GainCheckReport check_gain_conditions(const FxtdoGains& gains, double fdot_bound);

}  // namespace quadfx

#endif  // QUADFX_OBSERVERS_HPP

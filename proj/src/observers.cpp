#include "quadfx/observers.hpp"

#include <cmath>
#include <stdexcept>

#include "quadfx/plant.hpp"

namespace quadfx {

Vec3 virtual_input(const Quat& q, double thrust, double mass) {
  const Vec3 gravity(0.0, 0.0, kGravity);
  return mass * gravity - thrust * quat_to_rotation(q).col(2);
}

namespace {

Vec3 signum_with_layer(const Vec3& x, double half_width) {
  const double n = x.norm();
  if (n == 0.0) {
    return Vec3::Zero();
  }
  if (half_width > 0.0 && n < half_width) {
    return x / half_width;
  }
  return x / n;
}

}  // namespace

Vec3 phi1(const Vec3& e1, const FxtdoGains& g) {
  return g.k1 * signed_power(e1, 0.5) + g.k1p * e1 +
         g.k1pp * signed_power(e1, 1.0 / (1.0 - g.d_inf));
}

Vec3 phi2(const Vec3& e1, const FxtdoGains& g) {
  return g.k2 * signum_with_layer(e1, g.signum_boundary_layer) + g.k2p * e1 +
         g.k2pp * signed_power(e1, (1.0 + g.d_inf) / (1.0 - g.d_inf));
}

namespace {

void check_step(double h) {
  if (!(h > 0.0 && h <= 0.01)) {
    throw std::invalid_argument("observer step: h must lie in (0, 0.01]");
  }
}

}  // namespace

ObserverState fxtdo_step(const ObserverState& st, const Vec3& z1_meas, const Vec3& virtual_u,
                         const FxtdoGains& gains, double h) {
  check_step(h);
  const Vec3 e1 = z1_meas - st.z1_hat;
  ObserverState out;
  out.z1_hat = st.z1_hat + h * (st.fd_hat + virtual_u + gains.l1 * phi1(e1, gains));
  out.fd_hat = st.fd_hat + h * (gains.l2 * phi2(e1, gains));
  return out;
}

ObserverState hgdo_step(const ObserverState& st, const Vec3& z1_meas, const Vec3& virtual_u,
                        const HgdoGains& gains, double h) {
  check_step(h);
  const Vec3 e1 = z1_meas - st.z1_hat;
  ObserverState out;
  out.z1_hat = st.z1_hat + h * (st.fd_hat + virtual_u + (gains.alpha1 / gains.eps) * e1);
  out.fd_hat = st.fd_hat + h * ((gains.alpha2 / (gains.eps * gains.eps)) * e1);
  return out;
}

GainCheckReport check_gain_conditions(const FxtdoGains& gains, double fdot_bound) {
  if (fdot_bound < 0.0) {
    throw std::invalid_argument("check_gain_conditions: negative derivative bound");
  }
  GainCheckReport r;
  r.fdot_bound = fdot_bound;
  r.l2_times_k2 = gains.l2 * gains.k2;
  r.margin = r.l2_times_k2 - fdot_bound;
  r.l2_condition_ok = r.margin > 0.0;
  r.l1 = gains.l1;
  return r;
}

}  // namespace quadfx

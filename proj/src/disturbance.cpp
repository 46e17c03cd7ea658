#include "quadfx/disturbance.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quadfx {

namespace {
constexpr double kPeriod = 15.0;  // s
const double kOmega = 2.0 * std::numbers::pi / kPeriod;
}  // namespace

DisturbanceSample sinusoid_disturbance(double dt) {
  DisturbanceSample d;
  if (dt < 0.0) {
    return d;
  }
  const double s = std::sin(kOmega * dt);
  const double c = std::cos(kOmega * dt);
  d.force = Vec3(1.0 + 0.5 * s, -0.5 * c, 0.0);
  d.torque = Vec3(0.2 * s, 0.2 * c, 0.0);
  return d;
}

DisturbanceSample constant_disturbance(double dt, const Vec3& f0) {
  DisturbanceSample d;
  if (dt < 0.0) {
    return d;
  }
  d.force = f0;
  return d;
}

DisturbanceProfile DisturbanceProfile::none() { return {}; }

DisturbanceProfile DisturbanceProfile::sinusoid(double activation_time) {
  DisturbanceProfile p;
  p.kind = Kind::Sinusoid;
  p.activation_time = activation_time;
  return p;
}

DisturbanceProfile DisturbanceProfile::constant(double activation_time, const Vec3& f0) {
  DisturbanceProfile p;
  p.kind = Kind::Constant;
  p.activation_time = activation_time;
  p.constant_force = f0;
  return p;
}

DisturbanceProfile DisturbanceProfile::scaled(double k) const {
  DisturbanceProfile p = *this;
  p.scale = scale * k;
  return p;
}

DisturbanceSample DisturbanceProfile::at(double t) const {
  const double dt = t - activation_time;
  DisturbanceSample d;
  switch (kind) {
    case Kind::None:
      return d;
    case Kind::Sinusoid:
      d = sinusoid_disturbance(dt);
      break;
    case Kind::Constant:
      d = constant_disturbance(dt, constant_force);
      break;
  }
  d.force *= scale;  // torque deliberately unscaled
  return d;
}

double DisturbanceProfile::force_derivative_bound() const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Sinusoid:
      return scale * 0.5 * kOmega;
    case Kind::Constant:
      return 0.0;
  }
  throw std::invalid_argument("force_derivative_bound: unsupported profile kind");
}

double DisturbanceProfile::force_amplitude() const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Sinusoid:
      // |f|^2 = 1.25 + sin, maximal at sin = 1.
      return scale * 1.5;
    case Kind::Constant:
      return scale * constant_force.norm();
  }
  throw std::invalid_argument("force_amplitude: unsupported profile kind");
}

}  // namespace quadfx

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "quadfx/core_math.hpp"
#include "quadfx/plant.hpp"

using namespace quadfx;

namespace {

std::mt19937_64 rng(42);

Vec3 random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

Quat random_unit_quat() {
  std::normal_distribution<double> n(0.0, 1.0);
  return quat_normalize({n(rng), n(rng), n(rng), n(rng)});
}

}  // namespace

TEST_CASE("signed_power examples") {
  CHECK(signed_power({1, 0, 0}, 0.5).isApprox(Vec3(1, 0, 0), 1e-15));
  CHECK(signed_power({0, 0, 0}, 0.0) == Vec3::Zero());
  CHECK(signed_power({4, 0, 0}, 1.5).isApprox(Vec3(8, 0, 0), 1e-14));
}

TEST_CASE("signed_power properties") {
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = random_vec(10.0);
    if (x.norm() < 1e-9) {
      continue;
    }
    std::uniform_real_distribution<double> ua(0.0, 3.0);
    const double a = ua(rng);

    // Identity at a = 1.
    CHECK(signed_power(x, 1.0) == x);
    // Norm scaling.
    CHECK(signed_power(x, a).norm() == doctest::Approx(std::pow(x.norm(), a)).epsilon(1e-12));
    // Odd symmetry.
    CHECK(signed_power(-x, a).isApprox(-signed_power(x, a), 1e-12));
    // Signum property: x . sgn(x) = |x|.
    CHECK(x.dot(signed_power(x, 0.0)) == doctest::Approx(x.norm()).epsilon(1e-12));
  }
}

TEST_CASE("quat_to_rotation identity and quarter turn") {
  CHECK(quat_to_rotation(Quat::identity()).isApprox(Mat3::Identity(), 1e-15));

  const double s = std::sqrt(2.0) / 2.0;
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK(quat_to_rotation({s, 0, 0, s}).isApprox(expected, 1e-12));
}

TEST_CASE("quat_to_rotation rejects non-unit input") {
  CHECK_THROWS_AS(quat_to_rotation({0.9, 0, 0, 0.1}), std::invalid_argument);
}

TEST_CASE("quat_to_rotation is orthonormal") {
  for (int i = 0; i < 100; ++i) {
    const Mat3 R = quat_to_rotation(random_unit_quat());
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("quat_derivative examples") {
  CHECK(quat_derivative(Quat::identity(), Vec3::Zero()) == Vec4::Zero());
  CHECK(quat_derivative(Quat::identity(), {2, 0, 0}).isApprox(Vec4(0, 1, 0, 0), 1e-15));
}

TEST_CASE("quat_derivative is orthogonal to q") {
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_unit_quat();
    const Vec3 w = random_vec(5.0);
    CHECK(std::abs(quat_derivative(q, w).dot(q.coeffs())) < 1e-12);
  }
}

TEST_CASE("quat_normalize") {
  const Quat q = quat_normalize({2, 0, 0, 0});
  CHECK(q.w == doctest::Approx(1.0));
  CHECK_THROWS_AS(quat_normalize({0, 0, 0, 0}), std::invalid_argument);

  const Quat u = random_unit_quat();
  const Quat n = quat_normalize(u);
  CHECK(std::abs(n.w - u.w) < 1e-15);
  CHECK(std::abs(n.x - u.x) < 1e-15);
}

TEST_CASE("quat_align_sign") {
  const Quat id = Quat::identity();
  const Quat neg{-1, 0, 0, 0};
  CHECK(quat_align_sign(id, id).w == 1.0);
  CHECK(quat_align_sign(id, neg).w == 1.0);
  // Tie: dot exactly zero keeps +q_ref.
  const Quat qx{0, 1, 0, 0};
  CHECK(quat_align_sign(id, qx).x == 1.0);
  for (int i = 0; i < 50; ++i) {
    const Quat a = random_unit_quat();
    const Quat b = random_unit_quat();
    CHECK(a.dot(quat_align_sign(a, b)) >= 0.0);
  }
}

TEST_CASE("quat_from_rotation round-trips") {
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_unit_quat();
    const Quat r = quat_from_rotation(quat_to_rotation(q));
    // Same rotation up to sign.
    const double d = std::abs(q.dot(r));
    CHECK(d == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("norm preserved over 1000 integration steps") {
  // Quaternion flow integrated with the plant RK4 keeps |q| = 1 within 1e-9.
  QuadParams params;
  QuadState s;
  s.attitude = Quat::identity();
  s.omega = Vec3(1.0, -0.7, 0.4);
  Wrench w;
  w.thrust = params.mass * kGravity;
  for (int i = 0; i < 1000; ++i) {
    s = rk4_step(s, w, Vec3::Zero(), Vec3::Zero(), params, 1e-3);
  }
  CHECK(std::abs(s.attitude.norm() - 1.0) < 1e-9);
}

#include <catch2/catch_amalgamated.hpp>

#include "ppc/frame.hpp"
#include "ppc/geometry.hpp"
#include "ppc/random.hpp"
#include "test_helpers.hpp"

using namespace ppc;

namespace {

// Independent oracle: Rodrigues in the normalized-axis form
// R = cos t I + sin t [k]x + (1 - cos t) k k^T, plus a quaternion route.
Mat3 rodrigues_oracle(const Vec3& v) {
  const double t = v.norm();
  if (t == 0.0) return Mat3::Identity();
  const Vec3 k = v / t;
  Mat3 kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return std::cos(t) * Mat3::Identity() + std::sin(t) * kx +
         (1.0 - std::cos(t)) * (k * k.transpose());
}

Mat3 quaternion_oracle(const Vec3& v) {
  const double t = v.norm();
  if (t == 0.0) return Mat3::Identity();
  const Vec3 k = v / t;
  const double w = std::cos(t / 2), s = std::sin(t / 2);
  return Eigen::Quaterniond(w, s * k.x(), s * k.y(), s * k.z()).toRotationMatrix();
}

}  // namespace

TEST_CASE("so3_exp basic values") {
  REQUIRE((so3_exp(Vec3::Zero()) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);

  // half turn about x
  Mat3 expected;
  expected << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  REQUIRE((so3_exp(Vec3(M_PI, 0, 0)) - expected).cwiseAbs().maxCoeff() < 1e-12);

  // quarter turn about z maps x->y and y->-x
  const Mat3 r = so3_exp(Vec3(0, 0, M_PI / 2));
  REQUIRE((r * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-12);
  REQUIRE((r * Vec3::UnitY() + Vec3::UnitX()).norm() < 1e-12);
}

TEST_CASE("so3_exp rejects non-finite input") {
  REQUIRE_THROWS_AS(so3_exp(Vec3(std::nan(""), 0, 0)), std::invalid_argument);
}

TEST_CASE("so3_exp matches independent oracles on random input") {
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    const double scale = i % 3 == 0 ? 1e-7 : 3.0;  // exercise the Taylor branch too
    const Vec3 v(rng.normal(0, scale), rng.normal(0, scale), rng.normal(0, scale));
    const Mat3 r = so3_exp(v);
    REQUIRE(is_valid_rotation(r, 1e-9));
    REQUIRE((r - rodrigues_oracle(v)).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE((r - quaternion_oracle(v)).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE((r * so3_exp(-v) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("rotation_angle_between") {
  Rng rng(7);
  const Pose identity;

  SECTION("zero for equal poses") {
    const Pose p = test::random_pose(rng);
    REQUIRE(rotation_angle_between(p, p) == 0.0);
  }

  SECTION("0.1 rad perturbation reads 5.7296 degrees") {
    Pose a = test::random_pose(rng);
    Pose b = a;
    b.rotation = so3_exp(Vec3(0.1, 0, 0)) * a.rotation;
    REQUIRE(rotation_angle_between(a, b) == Catch::Approx(0.1 * 180.0 / M_PI).epsilon(1e-9));
  }

  SECTION("antipodal is 180") {
    Pose b;
    b.rotation = so3_exp(Vec3(0, M_PI, 0));
    REQUIRE(rotation_angle_between(identity, b) == Catch::Approx(180.0).margin(1e-6));
  }

  SECTION("equals the axis-angle norm") {
    for (int i = 0; i < 500; ++i) {
      Vec3 v(rng.normal(), rng.normal(), rng.normal());
      const double want = rng.uniform(1e-3, M_PI - 1e-6);
      v *= want / v.norm();
      Pose b;
      b.rotation = so3_exp(v);
      const double got = rotation_angle_between(identity, b) * M_PI / 180.0;
      REQUIRE(got == Catch::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("apply_delta with zero delta reproduces the reference pose") {
  Rng rng(3);
  const CameraIntrinsics intr = test::default_intrinsics();
  for (int i = 0; i < 100; ++i) {
    const Pose pose = test::random_pose(rng);
    const ReferenceFrame frame = make_reference_frame(intr, pose, 0.25);
    const Pose back = apply_delta(frame, PoseDelta{});
    REQUIRE((back.rotation - pose.rotation).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE((back.translation - pose.translation).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("apply_delta depth scaling keeps the viewing ray") {
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.05, -0.03, 0.9, Vec3(0.2, 0.1, -0.4));
  const ReferenceFrame frame = make_reference_frame(intr, pose, 0.25);
  PoseDelta delta;
  delta.theta_d = std::log(2.0);
  const Pose out = apply_delta(frame, delta);
  REQUIRE(out.depth() == Catch::Approx(2.0 * pose.depth()).epsilon(1e-12));
  const Vec3 dir0 = pose.translation.normalized();
  const Vec3 dir1 = out.translation.normalized();
  REQUIRE((dir0 - dir1).norm() < 1e-12);
  REQUIRE((out.rotation - pose.rotation).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("apply_delta lateral offset lands where requested") {
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(-0.08, 0.02, 1.1);
  const ReferenceFrame frame = make_reference_frame(intr, pose, 0.3);
  PoseDelta delta;
  delta.theta_l = Vec2(10.0, 0.0);
  const Pose out = apply_delta(frame, delta);
  const Vec2 projected = project_to_patch(frame.zoom, out, Vec3::Zero());
  REQUIRE((projected - (frame.projected_center0 + delta.theta_l)).norm() < 1e-6);
}

TEST_CASE("apply_delta round trip over random deltas") {
  Rng rng(11);
  const CameraIntrinsics intr = test::default_intrinsics();
  for (int i = 0; i < 300; ++i) {
    const Pose pose = test::random_pose(rng, 0.6, 1.4);
    const ReferenceFrame frame = make_reference_frame(intr, pose, 0.2);
    PoseDelta delta;
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    delta.theta_r = axis.normalized() * rng.uniform(0.0, 1.0);
    delta.theta_l = Vec2(rng.uniform(-40, 40), rng.uniform(-40, 40));
    delta.theta_d = rng.uniform(-0.3, 0.3);
    const Pose out = apply_delta(frame, delta);

    REQUIRE(out.depth() == Catch::Approx(std::exp(delta.theta_d) * frame.depth0).epsilon(1e-12));
    const Vec2 projected = project_to_patch(frame.zoom, out, Vec3::Zero());
    REQUIRE((projected - (frame.projected_center0 + delta.theta_l)).norm() < 1e-6);
    const double angle =
        rotation_angle_between(pose, out) * M_PI / 180.0;
    REQUIRE(angle == Catch::Approx(delta.theta_r.norm()).margin(1e-9));
  }
}

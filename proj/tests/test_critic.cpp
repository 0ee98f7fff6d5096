#include <catch2/catch_amalgamated.hpp>

#include "ppc/critic.hpp"
#include "ppc/shapes.hpp"
#include "test_helpers.hpp"

using namespace ppc;

namespace {

// Brute-force reimplementation of the mean reprojection error with its own
// inline pinhole and patch math; deliberately does not call the camera
// module.
double brute_force_error(const Pose& hat, const Pose& truth, const std::vector<Vec3>& points,
                         const ZoomedCamera& zoom) {
  const double corner_x = zoom.patch_center.x() - zoom.patch_side / 2.0;
  const double corner_y = zoom.patch_center.y() - zoom.patch_side / 2.0;
  const double s = zoom.out_resolution / zoom.patch_side;
  double total = 0.0;
  for (const Vec3& p : points) {
    double coords[2][2];
    const Pose* poses[2] = {&hat, &truth};
    for (int k = 0; k < 2; ++k) {
      const Vec3 q = poses[k]->rotation * p + poses[k]->translation;
      const double u = zoom.base.fx * q.x() / q.z() + zoom.base.cx;
      const double v = zoom.base.fy * q.y() / q.z() + zoom.base.cy;
      coords[k][0] = (u - corner_x) * s;
      coords[k][1] = (v - corner_y) * s;
    }
    total += std::hypot(coords[0][0] - coords[1][0], coords[0][1] - coords[1][1]);
  }
  return total / double(points.size());
}

SceneContext make_context(const Pose& hat, const Pose& truth, const std::vector<Vec3>& pts,
                          const ZoomedCamera& zoom, const PoseDelta& delta = {}) {
  SceneContext ctx;
  ctx.pose_hat = hat;
  ctx.pose_true = truth;
  ctx.points = &pts;
  ctx.zoom_hat = zoom;
  ctx.delta = delta;
  ctx.has_ground_truth = true;
  return ctx;
}

}  // namespace

TEST_CASE("oracle is zero at the true pose") {
  const TriangleMesh mesh = shapes::make_builtin("box");
  const CameraIntrinsics intr = test::default_intrinsics();
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const Pose pose = test::random_pose(rng);
    const ZoomedCamera zoom = make_zoom(intr, pose, mesh.diameter);
    REQUIRE(oracle_error(pose, pose, model_points(mesh, 500), zoom) == 0.0);
  }
}

TEST_CASE("oracle matches the brute-force loop") {
  const TriangleMesh mesh = shapes::make_builtin("bracket");
  const std::vector<Vec3> points = model_points(mesh, 500);
  const CameraIntrinsics intr = test::default_intrinsics();
  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const Pose truth = test::random_pose(rng);
    Pose hat = truth;
    hat.rotation = so3_exp(Vec3(rng.normal(0, 0.2), rng.normal(0, 0.2), rng.normal(0, 0.2))) *
                   truth.rotation;
    hat.translation += Vec3(rng.normal(0, 0.02), rng.normal(0, 0.02), rng.normal(0, 0.05));
    if (hat.depth() <= 0.1) continue;
    const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
    const double got = oracle_error(hat, truth, points, zoom);
    const double want = brute_force_error(hat, truth, points, zoom);
    REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("pure lateral shifts have a closed form on planar point sets") {
  // all points at the same camera depth shift by exactly fx*d/z base pixels
  std::vector<Vec3> planar;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) planar.emplace_back(0.02 * i, 0.015 * j, 0.0);
  const CameraIntrinsics intr = test::default_intrinsics();
  Pose truth;  // identity rotation keeps the point plane fronto-parallel
  truth.translation = Vec3(0.01, -0.02, 0.9);
  Rng rng(33);
  for (int i = 0; i < 50; ++i) {
    const double dx = rng.uniform(-0.05, 0.05);
    const double dy = rng.uniform(-0.05, 0.05);
    Pose hat = truth;
    hat.translation += Vec3(dx, dy, 0.0);
    const ZoomedCamera zoom = make_zoom(intr, hat, 0.15);
    const double scale = zoom.out_resolution / zoom.patch_side;
    const double expected =
        std::hypot(intr.fx * dx / truth.depth(), intr.fy * dy / truth.depth()) * scale;
    const double got = oracle_error(hat, truth, planar, zoom);
    REQUIRE(got == Catch::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("oracle is invariant under point permutation") {
  const TriangleMesh mesh = shapes::make_builtin("cube");
  std::vector<Vec3> points = model_points(mesh, 500);
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose truth = test::pose_at(0.02, 0.0, 0.8);
  Pose hat = truth;
  hat.rotation = so3_exp(Vec3(0.1, -0.05, 0.2));
  const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
  const double before = oracle_error(hat, truth, points, zoom);
  std::reverse(points.begin(), points.end());
  std::swap(points[0], points[3]);
  REQUIRE(oracle_error(hat, truth, points, zoom) == Catch::Approx(before).epsilon(1e-15));
}

TEST_CASE("points behind the camera raise") {
  const std::vector<Vec3> points = {Vec3(0, 0, 0)};
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose good = test::pose_at(0, 0, 1.0);
  Pose behind = good;
  behind.translation.z() = -1.0;
  const ZoomedCamera zoom = make_zoom(intr, good, 0.2);
  REQUIRE_THROWS_AS(oracle_error(behind, good, points, zoom), BehindCameraError);
  REQUIRE_THROWS_AS(oracle_error(good, behind, points, zoom), BehindCameraError);
}

TEST_CASE("depth perturbation error against the brute force on the cube") {
  const TriangleMesh mesh = shapes::make_builtin("cube");
  const std::vector<Vec3> points = model_points(mesh, 500);
  const CameraIntrinsics intr = test::default_intrinsics();
  Pose truth;
  truth.translation = Vec3(0, 0, 1.0);
  Pose hat = truth;
  hat.translation *= std::exp(0.1);
  const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
  const double got = oracle_error(hat, truth, points, zoom);
  REQUIRE(got == Catch::Approx(brute_force_error(hat, truth, points, zoom)).epsilon(1e-12));
  REQUIRE(got > 0.0);
}

TEST_CASE("noisy critic") {
  const TriangleMesh mesh = shapes::make_builtin("box");
  const std::vector<Vec3> points = model_points(mesh, 300);
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose truth = test::pose_at(0.0, 0.0, 0.9);

  SECTION("all-zero config equals the oracle clamped at saturation") {
    NoisyCriticConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.bias_amplitude = 0.0;
    NoisyCritic critic(cfg);
    Pose hat = truth;
    hat.rotation = so3_exp(Vec3(0.05, 0, 0));
    const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
    const SceneContext ctx = make_context(hat, truth, points, zoom);
    CriticRequest req;
    req.context = &ctx;
    const double oracle = oracle_error(hat, truth, points, zoom);
    REQUIRE(critic.evaluate(req) == Catch::Approx(std::min(oracle, 50.0)).epsilon(1e-12));
  }

  SECTION("saturates at 50 px") {
    NoisyCriticConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.bias_amplitude = 0.0;
    NoisyCritic critic(cfg);
    Pose hat = truth;
    hat.translation += Vec3(0.2, 0.0, 0.0);  // way off: oracle far above 50
    const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
    const SceneContext ctx = make_context(hat, truth, points, zoom);
    CriticRequest req;
    req.context = &ctx;
    REQUIRE(oracle_error(hat, truth, points, zoom) > 100.0);
    REQUIRE(critic.evaluate(req) == 50.0);
  }

  SECTION("identical requests return identical values") {
    NoisyCriticConfig cfg;
    cfg.noise_sigma = 2.0;
    cfg.bias_amplitude = 5.0;
    cfg.seed = 77;
    NoisyCritic critic(cfg);
    Pose hat = truth;
    hat.rotation = so3_exp(Vec3(0.02, -0.01, 0.04));
    const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
    PoseDelta delta;
    delta.theta_r = Vec3(0.02, -0.01, 0.04);
    const SceneContext ctx = make_context(hat, truth, points, zoom, delta);
    CriticRequest req;
    req.context = &ctx;
    const double first = critic.evaluate(req);
    for (int i = 0; i < 5; ++i) REQUIRE(critic.evaluate(req) == first);

    // a different seed gives a different surface
    cfg.seed = 78;
    NoisyCritic other(cfg);
    REQUIRE(other.evaluate(req) != first);
  }

  SECTION("never exceeds saturation and never goes negative") {
    NoisyCriticConfig cfg;
    cfg.noise_sigma = 30.0;
    cfg.bias_amplitude = 30.0;
    NoisyCritic critic(cfg);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      Pose hat = truth;
      hat.rotation = so3_exp(Vec3(rng.normal(0, 0.3), rng.normal(0, 0.3), rng.normal(0, 0.3)));
      PoseDelta delta;
      delta.theta_r = Vec3(rng.normal(), rng.normal(), rng.normal());
      const ZoomedCamera zoom = make_zoom(intr, hat, mesh.diameter);
      const SceneContext ctx = make_context(hat, truth, points, zoom, delta);
      CriticRequest req;
      req.context = &ctx;
      const double v = critic.evaluate(req);
      REQUIRE(v >= 0.0);
      REQUIRE(v <= cfg.saturation);
    }
  }

  SECTION("bias is smooth and bounded by its amplitude") {
    NoisyCriticConfig cfg;
    cfg.bias_amplitude = 5.0;
    cfg.seed = 3;
    NoisyCritic critic(cfg);
    double max_abs = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      PoseDelta d;
      d.theta_r = Vec3(-1.0 + 0.002 * i, 0, 0);
      max_abs = std::max(max_abs, std::abs(critic.bias(d)));
    }
    REQUIRE(max_abs <= 5.0 + 1e-12);
    REQUIRE(max_abs > 0.5);  // the surface actually varies
  }
}

TEST_CASE("critics require ground-truth context") {
  OracleCritic oracle;
  CriticRequest req;  // no context
  REQUIRE_THROWS_AS(oracle.evaluate(req), std::invalid_argument);
  NoisyCritic noisy{NoisyCriticConfig{}};
  REQUIRE_THROWS_AS(noisy.evaluate(req), std::invalid_argument);
}

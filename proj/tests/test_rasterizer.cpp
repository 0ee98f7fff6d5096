#include <catch2/catch_amalgamated.hpp>

#include "ppc/rasterizer.hpp"
#include "ppc/shapes.hpp"
#include "test_helpers.hpp"

using namespace ppc;

namespace {

TriangleMesh single_triangle(double albedo_value) {
  TriangleMesh mesh;
  mesh.vertices = {Vec3(-0.5, -0.5, 0), Vec3(0.5, -0.5, 0), Vec3(0.0, 0.5, 0)};
  mesh.triangles = {{0, 1, 2}};
  mesh.normals = {Vec3(0, 0, -1), Vec3(0, 0, -1), Vec3(0, 0, -1)};
  mesh.albedo.assign(3, Vec3(albedo_value, albedo_value, albedo_value));
  mesh.diameter = 1.0;
  mesh.symmetries = {Mat3::Identity()};
  return mesh;
}

int mask_count(const RenderOutput& out) {
  int n = 0;
  for (auto m : out.mask) n += m;
  return n;
}

}  // namespace

TEST_CASE("mesh behind the camera renders as background") {
  const TriangleMesh cube = shapes::make_builtin("cube");
  const CameraIntrinsics intr = test::default_intrinsics();
  ZoomedCamera zoom;
  zoom.base = intr;
  zoom.patch_center = Vec2(320, 240);
  zoom.patch_side = 120;
  zoom.out_resolution = 64;
  Pose pose;
  pose.translation = Vec3(0, 0, -1.0);
  const RenderOutput out = render(cube, pose, zoom, ShadingParams{}, 64);
  REQUIRE(mask_count(out) == 0);
  for (float v : out.color.pixels.data) REQUIRE(v == 0.0f);
  for (float d : out.depth) REQUIRE(std::isinf(d));
}

TEST_CASE("lambertian shading of a fronto-parallel triangle") {
  const double albedo = 0.6;
  const TriangleMesh tri = single_triangle(albedo);
  Pose pose;
  pose.translation = Vec3(0, 0, 1.0);
  ShadingParams shading;  // light at camera center, ambient 0.3, diffuse 0.7
  const PinholeView view{500, 500, 64, 64, 128, 128};
  const SceneRender out = rasterize_scene({{&tri, pose}}, view, shading);

  // on the principal axis: cos = 1, intensity = albedo*(0.3 + 0.7)
  REQUIRE(out.winner[64 * 128 + 64] == 0);
  REQUIRE(out.color.at(64, 64)[0] == Catch::Approx(albedo).margin(1e-6));

  // 50 px off axis: point (0.1, 0, 1), cos = 1/|p|
  const double cos_t = 1.0 / Vec3(0.1, 0, 1).norm();
  const double expected = albedo * (0.3 + 0.7 * cos_t);
  REQUIRE(out.winner[64 * 128 + 114] == 0);
  REQUIRE(out.color.at(114, 64)[0] == Catch::Approx(expected).margin(1e-5));

  // depth is the camera-space z
  REQUIRE(out.depth[64 * 128 + 64] == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("rendering is deterministic") {
  const TriangleMesh mesh = shapes::make_builtin("bracket");
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.02, -0.01, 0.8, Vec3(0.4, 0.3, -0.2));
  const ZoomedCamera zoom = make_zoom(intr, pose, mesh.diameter, 256);
  ShadingParams shading;
  shading.mode = ShadingParams::Mode::phong;
  shading.specular = 0.4;
  const RenderOutput a = render(mesh, pose, zoom, shading, 128);
  const RenderOutput b = render(mesh, pose, zoom, shading, 128);
  REQUIRE(a.color.pixels.data == b.color.pixels.data);
  REQUIRE(a.mask == b.mask);
  REQUIRE(a.depth == b.depth);
}

TEST_CASE("mask and depth stay consistent through the upsample") {
  const TriangleMesh mesh = shapes::make_builtin("blob");
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.0, 0.0, 0.9);
  const ZoomedCamera zoom = make_zoom(intr, pose, mesh.diameter, 200);
  const RenderOutput out = render(mesh, pose, zoom, ShadingParams{}, 100);
  REQUIRE(mask_count(out) > 0);
  for (size_t i = 0; i < out.mask.size(); ++i) {
    REQUIRE((out.mask[i] == 1) == std::isfinite(out.depth[i]));
    if (!out.mask[i]) {
      REQUIRE(out.color.pixels.data[3 * i] == 0.0f);
      REQUIRE(out.color.pixels.data[3 * i + 1] == 0.0f);
      REQUIRE(out.color.pixels.data[3 * i + 2] == 0.0f);
    }
  }
}

TEST_CASE("colors stay in range under exaggerated phong weights") {
  const TriangleMesh mesh = shapes::make_builtin("box");
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.0, 0.0, 0.8, Vec3(0.5, 0.4, 0.1));
  const ZoomedCamera zoom = make_zoom(intr, pose, mesh.diameter, 128);
  ShadingParams shading;
  shading.mode = ShadingParams::Mode::phong;
  shading.ambient = 2.0;
  shading.diffuse = 2.0;
  shading.specular = 2.0;
  shading.shininess = 3.0;
  shading.whiteness = 1.0;
  shading.light_position = Vec3(0.3, -0.2, 0.1);
  const RenderOutput out = render(mesh, pose, zoom, shading, 128);
  for (float v : out.color.pixels.data) {
    REQUIRE(v >= 0.0f);
    REQUIRE(v <= 1.0f);
  }
}

TEST_CASE("depth test matches per-object renders") {
  const TriangleMesh a = shapes::make_builtin("cube");
  const TriangleMesh b = shapes::make_builtin("blob");
  const PinholeView view{500, 500, 64, 64, 128, 128};
  ShadingParams shading;
  const Pose pose_a = test::pose_at(-0.02, 0.0, 0.7);
  const Pose pose_b = test::pose_at(0.03, 0.01, 1.1, Vec3(0.3, 0, 0));
  const SceneRender solo_a = rasterize_scene({{&a, pose_a}}, view, shading);
  const SceneRender solo_b = rasterize_scene({{&b, pose_b}}, view, shading);
  const SceneRender joint = rasterize_scene({{&a, pose_a}, {&b, pose_b}}, view, shading);
  for (size_t i = 0; i < joint.depth.size(); ++i) {
    REQUIRE(joint.depth[i] == std::min(solo_a.depth[i], solo_b.depth[i]));
    const int expected_winner = solo_a.depth[i] <= solo_b.depth[i]
                                    ? (std::isfinite(solo_a.depth[i]) ? 0 : -1)
                                    : 1;
    REQUIRE(joint.winner[i] == expected_winner);
  }
}

TEST_CASE("render_with_occluders visibility counting") {
  const TriangleMesh target = shapes::make_builtin("cube");
  const TriangleMesh occluder = shapes::make_builtin("box");
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.0, 0.0, 1.0);
  const ZoomedCamera zoom = make_zoom(intr, pose, target.diameter, 256);
  ShadingParams shading;

  SECTION("no occluders reproduces the solo mask count") {
    const RenderOutput solo = render(target, pose, zoom, shading, 128);
    const auto [joint, visible] =
        render_with_occluders({{&target, pose}}, 0, zoom, shading, 128);
    REQUIRE(visible == mask_count(solo));
    REQUIRE(joint.mask == solo.mask);
  }

  SECTION("a nearer occluder covering everything zeroes the count") {
    const Pose front = test::pose_at(0.0, 0.0, 0.45);
    const auto [joint, visible] =
        render_with_occluders({{&target, pose}, {&occluder, front}}, 0, zoom, shading, 128);
    REQUIRE(visible == 0);
  }

  SECTION("half-plane occluder hides about half, reproducibly") {
    // a thin wall covering the left half of the patch, nearer than the target
    TriangleMesh wall;
    wall.vertices = {Vec3(-2, -2, 0), Vec3(0, -2, 0), Vec3(0, 2, 0), Vec3(-2, 2, 0)};
    wall.triangles = {{0, 1, 2}, {0, 2, 3}};
    wall.normals.assign(4, Vec3(0, 0, -1));
    wall.albedo.assign(4, Vec3(0.5, 0.5, 0.5));
    wall.diameter = 4.0;
    wall.symmetries = {Mat3::Identity()};
    const Pose wall_pose = test::pose_at(0.0, 0.0, 0.6);

    const SceneRender solo = rasterize_scene({{&target, pose}}, view_from_zoom(zoom, 128),
                                             shading);
    const SceneRender joint = rasterize_scene({{&target, pose}, {&wall, wall_pose}},
                                              view_from_zoom(zoom, 128), shading);
    int reference = 0;  // solo pixels strictly right of the wall edge
    const PinholeView v = view_from_zoom(zoom, 128);
    const double edge_x = v.cx;  // wall spans x<0 in camera frame at its depth
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x)
        if (solo.winner[size_t(y) * 128 + x] == 0 && x >= edge_x) ++reference;
    const int visible = joint.count_winner(0);
    REQUIRE(visible == reference);
    const double ratio = double(visible) / double(solo.count_winner(0));
    REQUIRE(ratio > 0.35);
    REQUIRE(ratio < 0.65);
  }
}

TEST_CASE("lateral translation moves the silhouette centroid as predicted") {
  const TriangleMesh mesh = shapes::make_builtin("blob");
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.0, 0.0, 0.9);
  const ZoomedCamera zoom = make_zoom(intr, pose, mesh.diameter, 256);
  const double delta = 0.01;  // meters
  Pose shifted = pose;
  shifted.translation += Vec3(delta, 0, 0);

  auto centroid_x = [&](const Pose& p) {
    const SceneRender r = rasterize_scene({{&mesh, p}}, view_from_zoom(zoom, 256), ShadingParams{});
    double sum = 0;
    int n = 0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x)
        if (r.winner[size_t(y) * 256 + x] == 0) {
          sum += x;
          ++n;
        }
    REQUIRE(n > 0);
    return sum / n;
  };

  const double moved = centroid_x(shifted) - centroid_x(pose);
  const double predicted = view_from_zoom(zoom, 256).fx * delta / pose.depth();
  REQUIRE(std::abs(moved - predicted) < 1.0);
}

TEST_CASE("degenerate zoom is rejected") {
  const TriangleMesh cube = shapes::make_builtin("cube");
  ZoomedCamera zoom;
  zoom.base = test::default_intrinsics();
  zoom.patch_center = Vec2(320, 240);
  zoom.patch_side = 0.0;
  zoom.out_resolution = 64;
  REQUIRE_THROWS_AS(render(cube, test::pose_at(0, 0, 1), zoom, ShadingParams{}, 64),
                    std::invalid_argument);
}

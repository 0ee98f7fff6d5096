#include <catch2/catch_amalgamated.hpp>

#include "ppc/camera.hpp"
#include "ppc/random.hpp"
#include "test_helpers.hpp"

using namespace ppc;

TEST_CASE("project pinhole basics") {
  const CameraIntrinsics intr = test::default_intrinsics();
  REQUIRE((project(intr, Vec3(0, 0, 1)) - Vec2(320, 240)).norm() == 0.0);
  REQUIRE((project(intr, Vec3(0.1, 0, 1)) - Vec2(370, 240)).norm() < 1e-12);
  REQUIRE_THROWS_AS(project(intr, Vec3(0, 0, -1)), BehindCameraError);
  REQUIRE_THROWS_AS(project(intr, Vec3(0, 0, 0)), BehindCameraError);
}

TEST_CASE("make_zoom window size and center") {
  const CameraIntrinsics intr = test::default_intrinsics();

  SECTION("patch side from the projected diameter") {
    const Pose pose = test::pose_at(0, 0, 1.0);
    const ZoomedCamera zoom = make_zoom(intr, pose, 0.2, 512);
    REQUIRE(zoom.patch_side == Catch::Approx(120.0).epsilon(1e-12));  // 1.2*500*0.2/1
    REQUIRE((zoom.patch_center - Vec2(320, 240)).norm() == 0.0);
  }

  SECTION("doubled depth halves the window") {
    const ZoomedCamera near = make_zoom(intr, test::pose_at(0.02, 0.01, 0.7), 0.2);
    const ZoomedCamera far = make_zoom(intr, test::pose_at(0.04, 0.02, 1.4), 0.2);
    REQUIRE(far.patch_side == Catch::Approx(near.patch_side / 2).epsilon(1e-12));
  }

  SECTION("behind camera") {
    REQUIRE_THROWS_AS(make_zoom(intr, test::pose_at(0, 0, -0.5), 0.2), BehindCameraError);
  }
}

TEST_CASE("project_to_patch") {
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.06, -0.04, 0.9, Vec3(0.3, -0.2, 0.1));
  const ZoomedCamera zoom = make_zoom(intr, pose, 0.2, 512);

  SECTION("object center lands at the patch center") {
    const Vec2 c = project_to_patch(zoom, pose, Vec3::Zero());
    REQUIRE((c - Vec2(256, 256)).norm() < 1e-9);
  }

  SECTION("base-pixel displacements scale by out_resolution/patch_side") {
    // fx=500, depth 1, diameter 0.2 -> patch_side=120; 1 base px = 512/120 patch px
    const Pose center = test::pose_at(0, 0, 1.0);
    const ZoomedCamera z = make_zoom(intr, center, 0.2, 512);
    const Vec2 a = project_to_patch(z, center, Vec3::Zero());
    Pose shifted = center;
    shifted.translation += Vec3(1.0 / intr.fx, 0, 0);  // moves projection by exactly 1 base px
    const Vec2 b = project_to_patch(z, shifted, Vec3::Zero());
    REQUIRE((b - a).x() == Catch::Approx(512.0 / 120.0).epsilon(1e-12));
  }

  SECTION("unit scale when the window matches the output resolution") {
    ZoomedCamera unit = zoom;
    unit.patch_side = unit.out_resolution;
    const Vec2 base = project(intr, pose.translation);
    const Vec2 patch = project_to_patch(unit, pose, Vec3::Zero());
    REQUIRE((patch - (base - unit.corner())).norm() < 1e-12);
  }
}

TEST_CASE("extract_patch sampling") {
  const CameraIntrinsics intr{100, 100, 8, 8, 16, 16};

  SECTION("constant image stays constant") {
    Image img(16, 16, 0.5f);
    ZoomedCamera zoom;
    zoom.base = intr;
    zoom.patch_center = Vec2(8, 8);
    zoom.patch_side = 8;
    zoom.out_resolution = 32;
    const ImagePatch patch = extract_patch(img, zoom);
    for (float v : patch.pixels.data) REQUIRE(v == 0.5f);
  }

  SECTION("fully outside window reads black") {
    Image img(16, 16, 1.0f);
    ZoomedCamera zoom;
    zoom.base = intr;
    zoom.patch_center = Vec2(100, 100);
    zoom.patch_side = 8;
    zoom.out_resolution = 16;
    const ImagePatch patch = extract_patch(img, zoom);
    for (float v : patch.pixels.data) REQUIRE(v == 0.0f);
  }

  SECTION("bilinear midpoint of a 2x2 checkerboard") {
    CameraIntrinsics small{10, 10, 1, 1, 2, 2};
    Image img(2, 2);
    img.set(0, 0, 1, 1, 1);
    img.set(1, 0, 0, 0, 0);
    img.set(0, 1, 0, 0, 0);
    img.set(1, 1, 1, 1, 1);
    ZoomedCamera zoom;
    zoom.base = small;
    zoom.patch_center = Vec2(0.5, 0.5);
    zoom.patch_side = 2.0;
    zoom.out_resolution = 4;
    const ImagePatch patch = extract_patch(img, zoom);
    // output pixel (2,2) samples source (0.5, 0.5): mean of the 4 neighbors
    const auto c = patch.pixels.at(2, 2);
    REQUIRE(c[0] == Catch::Approx(0.5).epsilon(1e-6));
  }

  SECTION("dimension mismatch is rejected") {
    Image img(8, 8, 0.1f);
    ZoomedCamera zoom;
    zoom.base = intr;  // 16x16
    zoom.patch_center = Vec2(8, 8);
    zoom.patch_side = 4;
    REQUIRE_THROWS_AS(extract_patch(img, zoom), std::invalid_argument);
  }
}

TEST_CASE("unit zoom crop is the identity on pixel centers") {
  const CameraIntrinsics intr{50, 50, 16, 16, 32, 32};
  Image img(32, 32);
  Rng rng(5);
  for (float& v : img.data) v = float(rng.uniform());
  ZoomedCamera zoom;
  zoom.base = intr;
  zoom.patch_side = 8.0;
  zoom.out_resolution = 8;
  zoom.patch_center = Vec2(12.0, 9.0);  // integer corner at (8, 5)
  const ImagePatch patch = extract_patch(img, zoom);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const auto got = patch.pixels.at(x, y);
      const auto want = img.at(x + 8, y + 5);
      REQUIRE(got[0] == want[0]);
      REQUIRE(got[1] == want[1]);
      REQUIRE(got[2] == want[2]);
    }
}

TEST_CASE("zoom scale covariance") {
  // Scaling the diameter by k scales patch_side by k and divides patch-pixel
  // displacements of fixed 3D offsets by k.
  const CameraIntrinsics intr = test::default_intrinsics();
  const Pose pose = test::pose_at(0.03, 0.02, 1.0);
  const Vec3 offset(0.01, -0.02, 0.0);
  const double k = 2.5;
  const ZoomedCamera z1 = make_zoom(intr, pose, 0.2);
  const ZoomedCamera z2 = make_zoom(intr, pose, 0.2 * k);
  REQUIRE(z2.patch_side == Catch::Approx(k * z1.patch_side).epsilon(1e-12));
  const Vec2 d1 = project_to_patch(z1, pose, offset) - project_to_patch(z1, pose, Vec3::Zero());
  const Vec2 d2 = project_to_patch(z2, pose, offset) - project_to_patch(z2, pose, Vec3::Zero());
  REQUIRE(d1.norm() == Catch::Approx(k * d2.norm()).epsilon(1e-9));
}

#pragma once

#include <cmath>

#include "ppc/geometry.hpp"
#include "ppc/image.hpp"

namespace ppc {

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
};

// Square object-centered patch window of the zoom-in operator: a crop of the
// base image at [patch_center +- patch_side/2]^2 resampled to out_resolution^2.
struct ZoomedCamera {
  CameraIntrinsics base;
  Vec2 patch_center = Vec2::Zero();  // base-image pixels
  double patch_side = 0.0;           // base-image pixels
  int out_resolution = 512;

  double scale() const { return out_resolution / patch_side; }
  Vec2 corner() const { return patch_center - Vec2(patch_side, patch_side) * 0.5; }

  // Patch-frame pinhole parameters: base intrinsics shifted by the window
  // corner and scaled to the output resolution.
  double fx_eff() const { return base.fx * scale(); }
  double fy_eff() const { return base.fy * scale(); }
  double cx_eff() const { return (base.cx - corner().x()) * scale(); }
  double cy_eff() const { return (base.cy - corner().y()) * scale(); }
};

// Square patch of image data together with the camera that produced it.
struct ImagePatch {
  Image pixels;
  ZoomedCamera camera;
};

inline Vec2 project(const CameraIntrinsics& intr, const Vec3& point) {
  if (!(point.z() > 0.0)) throw BehindCameraError("project: point has non-positive depth");
  return Vec2(intr.fx * point.x() / point.z() + intr.cx,
              intr.fy * point.y() / point.z() + intr.cy);
}

// Zoom window for a pose: centered at the projected object center, sized
// 1.2x the projected object diameter mean(fx,fy)*D/z.
inline ZoomedCamera make_zoom(const CameraIntrinsics& intr, const Pose& pose, double diameter,
                              int out_resolution = 512) {
  require(diameter > 0.0, "make_zoom: diameter must be positive");
  require(out_resolution >= 2, "make_zoom: out_resolution must be >= 2");
  if (!(pose.depth() > 0.0)) throw BehindCameraError("make_zoom: pose has non-positive depth");
  ZoomedCamera zoom;
  zoom.base = intr;
  zoom.patch_center = project(intr, pose.translation);
  zoom.patch_side = 1.2 * 0.5 * (intr.fx + intr.fy) * diameter / pose.depth();
  zoom.out_resolution = out_resolution;
  return zoom;
}

// Base-image pixel coordinates -> patch pixel coordinates.
inline Vec2 base_to_patch(const ZoomedCamera& zoom, const Vec2& base_px) {
  return (base_px - zoom.corner()) * zoom.scale();
}

inline Vec2 patch_to_base(const ZoomedCamera& zoom, const Vec2& patch_px) {
  return zoom.corner() + patch_px / zoom.scale();
}

// Transform an object-frame point by the pose and project it into the patch.
inline Vec2 project_to_patch(const ZoomedCamera& zoom, const Pose& pose, const Vec3& point_object) {
  const Vec3 p_cam = pose.rotation * point_object + pose.translation;
  return base_to_patch(zoom, project(zoom.base, p_cam));
}

// Bilinear crop-and-resample of the zoom window; out-of-bounds source taps
// read as black to match the rendered background.
inline ImagePatch extract_patch(const Image& image, const ZoomedCamera& zoom) {
  require(image.width == zoom.base.width && image.height == zoom.base.height,
          "extract_patch: image dimensions do not match the zoom's base camera");
  require(zoom.patch_side > 0.0, "extract_patch: degenerate patch window");
  ImagePatch patch;
  patch.camera = zoom;
  patch.pixels = Image(zoom.out_resolution, zoom.out_resolution);
  const Vec2 corner = zoom.corner();
  const double step = zoom.patch_side / zoom.out_resolution;
  for (int y = 0; y < zoom.out_resolution; ++y) {
    const double sy = corner.y() + y * step;
    for (int x = 0; x < zoom.out_resolution; ++x) {
      const auto c = sample_bilinear(image, corner.x() + x * step, sy);
      patch.pixels.set(x, y, c[0], c[1], c[2]);
    }
  }
  return patch;
}

}  // namespace ppc

#pragma once

#include "ppc/camera.hpp"
#include "ppc/geometry.hpp"

namespace ppc {

// Reference point of the local pose parameterization: the initial proposal,
// its projected center in the reference patch, its depth, and the patch
// camera fixed at the proposal. theta_l lives in this patch's pixel frame for
// the whole refinement run.
struct ReferenceFrame {
  Pose pose0;
  Vec2 projected_center0 = Vec2::Zero();  // patch pixels
  double depth0 = 0.0;                    // meters
  ZoomedCamera zoom;
};

inline ReferenceFrame make_reference_frame(const CameraIntrinsics& intr, const Pose& pose0,
                                           double diameter, int out_resolution = 512) {
  if (!(pose0.depth() > 0.0))
    throw BehindCameraError("make_reference_frame: proposal has non-positive depth");
  ReferenceFrame frame;
  frame.pose0 = pose0;
  frame.zoom = make_zoom(intr, pose0, diameter, out_resolution);
  frame.projected_center0 = project_to_patch(frame.zoom, pose0, Vec3::Zero());
  frame.depth0 = pose0.depth();
  return frame;
}

// Apply a delta around the reference: rotation composes the exponential with
// the reference rotation; the projected center moves by theta_l in reference
// patch pixels; depth scales by e^theta_d; translation is recovered by
// back-projecting through the reference patch intrinsics at the new depth.
inline Pose apply_delta(const ReferenceFrame& frame, const PoseDelta& delta) {
  require(delta.theta_r.allFinite() && delta.theta_l.allFinite() && std::isfinite(delta.theta_d),
          "apply_delta: non-finite delta");
  Pose pose;
  pose.rotation = so3_exp(delta.theta_r) * frame.pose0.rotation;
  const Vec2 center_px = frame.projected_center0 + delta.theta_l;
  const double depth = std::exp(delta.theta_d) * frame.depth0;
  pose.translation =
      Vec3((center_px.x() - frame.zoom.cx_eff()) * depth / frame.zoom.fx_eff(),
           (center_px.y() - frame.zoom.cy_eff()) * depth / frame.zoom.fy_eff(), depth);
  return pose;
}

}  // namespace ppc

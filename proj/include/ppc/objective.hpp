#pragma once

#include <array>
#include <future>
#include <vector>

#include "ppc/critic.hpp"
#include "ppc/frame.hpp"
#include "ppc/rasterizer.hpp"

namespace ppc {

// Central-difference step sizes per parameter block.
struct FiniteDiffSteps {
  double rot = 0.01;    // radians
  double lat = 1.0;     // patch pixels
  double depth = 0.005; // log-depth units

  double axis_step(int axis) const { return axis < 3 ? rot : axis < 5 ? lat : depth; }
};

// The compound objective J(delta) = critic(Z_theta I_obs, P_rend(theta)) with
// theta = apply_delta(frame, delta). The zoom window is recomputed for every
// probed pose; the reference frame stays fixed for the whole run.
struct Objective {
  const Image* observed_image = nullptr;
  const TriangleMesh* mesh = nullptr;
  CameraIntrinsics intrinsics;
  ReferenceFrame frame;
  Critic* critic = nullptr;
  ShadingParams shading;
  std::vector<Vec3> points;  // model points handed to oracle-family critics
  Pose pose_true;
  bool has_ground_truth = false;
  int render_resolution = 256;
  int out_resolution = 512;
  bool parallel_probes = false;
  long eval_count = 0;
};

namespace detail {

inline double evaluate_impl(const Objective& obj, const PoseDelta& delta) {
  const Pose pose = apply_delta(obj.frame, delta);
  if (!(pose.depth() > 0.0))
    throw BehindCameraError("objective: probed pose has non-positive depth");
  const ZoomedCamera zoom =
      make_zoom(obj.intrinsics, pose, obj.mesh->diameter, obj.out_resolution);
  const RenderOutput rendered =
      render(*obj.mesh, pose, zoom, obj.shading, obj.render_resolution);
  const ImagePatch observed = extract_patch(*obj.observed_image, zoom);

  SceneContext ctx;
  ctx.pose_hat = pose;
  ctx.pose_true = obj.pose_true;
  ctx.points = &obj.points;
  ctx.zoom_hat = zoom;
  ctx.delta = delta;
  ctx.has_ground_truth = obj.has_ground_truth;

  CriticRequest req;
  req.observed = &observed;
  req.rendered = &rendered.color;
  req.context = &ctx;
  return obj.critic->evaluate(req);
}

}  // namespace detail

inline double evaluate(Objective& obj, const PoseDelta& delta) {
  const double value = detail::evaluate_impl(obj, delta);
  ++obj.eval_count;
  return value;
}

// Central differences with per-block steps; 12 evaluations. Probe values are
// optionally exposed (the optimizer logs their mean as the iterate's
// objective estimate without spending extra evaluations).
inline Vec6 numeric_gradient(Objective& obj, const PoseDelta& delta, const FiniteDiffSteps& steps,
                             std::array<double, 12>* probes_out = nullptr) {
  std::array<double, 12> probes{};
  const Vec6 center = delta.as_vector();
  auto probe_delta = [&](int k) {
    const int axis = k / 2;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    Vec6 v = center;
    v[axis] += sign * steps.axis_step(axis);
    return PoseDelta::from_vector(v);
  };
  if (obj.parallel_probes) {
    const Objective& view = obj;
    std::array<std::future<double>, 12> futures;
    for (int k = 0; k < 12; ++k)
      futures[k] = std::async(std::launch::async,
                              [&view, &probe_delta, k] { return detail::evaluate_impl(view, probe_delta(k)); });
    for (int k = 0; k < 12; ++k) probes[k] = futures[k].get();
  } else {
    for (int k = 0; k < 12; ++k) probes[k] = detail::evaluate_impl(obj, probe_delta(k));
  }
  obj.eval_count += 12;
  Vec6 grad;
  for (int axis = 0; axis < 6; ++axis)
    grad[axis] = (probes[2 * axis] - probes[2 * axis + 1]) / (2.0 * steps.axis_step(axis));
  if (probes_out) *probes_out = probes;
  return grad;
}

inline Vec6 numeric_gradient(Objective& obj, const PoseDelta& delta) {
  return numeric_gradient(obj, delta, FiniteDiffSteps{});
}

}  // namespace ppc

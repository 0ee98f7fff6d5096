#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ppc/camera.hpp"
#include "ppc/geometry.hpp"

namespace ppc {

struct MetricResult {
  double value = 0.0;
  bool accepted = false;
};

// Object-frame rotations the object is considered equivalent under. Always
// contains the identity.
struct SymmetrySet {
  std::vector<Mat3> rotations;

  static SymmetrySet identity_only() { return {{Mat3::Identity()}}; }

  void validate() const {
    for (const auto& r : rotations)
      if ((r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9) return;
    throw std::invalid_argument("symmetry set must contain the identity rotation");
  }
};

inline Pose compose_symmetry(const Pose& pose, const Mat3& sym) {
  Pose out = pose;
  out.rotation = pose.rotation * sym;
  return out;
}

// ADD: mean 3D distance between corresponding transformed model points;
// accepted strictly below 10 % of the object diameter.
inline MetricResult add_metric(const Pose& est, const Pose& gt, const std::vector<Vec3>& points,
                               double diameter) {
  require(!points.empty(), "add_metric: empty point set");
  double sum = 0.0;
  for (const Vec3& p : points) {
    const Vec3 a = est.rotation * p + est.translation;
    const Vec3 b = gt.rotation * p + gt.translation;
    sum += (a - b).norm();
  }
  const double value = sum / double(points.size());
  return {value, value < 0.1 * diameter};
}

// ADD-S: closest-point variant for symmetric objects.
inline MetricResult adds_metric(const Pose& est, const Pose& gt, const std::vector<Vec3>& points,
                                double diameter) {
  require(!points.empty(), "adds_metric: empty point set");
  std::vector<Vec3> est_pts(points.size()), gt_pts(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    est_pts[i] = est.rotation * points[i] + est.translation;
    gt_pts[i] = gt.rotation * points[i] + gt.translation;
  }
  double sum = 0.0;
  for (const Vec3& a : est_pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& b : gt_pts) best = std::min(best, (a - b).squaredNorm());
    sum += std::sqrt(best);
  }
  const double value = sum / double(points.size());
  return {value, value < 0.1 * diameter};
}

// Mean distance of the base-image projections; accepted strictly below the
// pixel threshold.
inline MetricResult reproj_metric(const Pose& est, const Pose& gt, const std::vector<Vec3>& points,
                                  const CameraIntrinsics& intr, double threshold_px = 5.0) {
  require(!points.empty(), "reproj_metric: empty point set");
  double sum = 0.0;
  for (const Vec3& p : points) {
    const Vec2 a = project(intr, est.rotation * p + est.translation);
    const Vec2 b = project(intr, gt.rotation * p + gt.translation);
    sum += (a - b).norm();
  }
  const double value = sum / double(points.size());
  return {value, value < threshold_px};
}

struct DegCmResult {
  double rot_err_deg = 0.0;
  double trans_err_m = 0.0;
  bool accepted = false;
};

// Accepted when the rotation error is at most deg_threshold AND the
// translation error at most cm_threshold (inclusive on both).
inline DegCmResult deg_cm_metric(const Pose& est, const Pose& gt, double deg_threshold = 5.0,
                                 double cm_threshold = 5.0) {
  DegCmResult out;
  out.rot_err_deg = rotation_angle_between(est, gt);
  out.trans_err_m = (est.translation - gt.translation).norm();
  out.accepted = out.rot_err_deg <= deg_threshold && out.trans_err_m <= cm_threshold * 0.01;
  return out;
}

// Evaluate a metric against the most beneficial symmetry-composed ground
// truth.
template <typename MetricFn>
inline auto symmetric_metric(MetricFn&& metric, const Pose& est, const Pose& gt,
                             const SymmetrySet& symmetry) {
  symmetry.validate();
  auto best = metric(est, compose_symmetry(gt, symmetry.rotations.front()));
  for (size_t i = 1; i < symmetry.rotations.size(); ++i) {
    auto candidate = metric(est, compose_symmetry(gt, symmetry.rotations[i]));
    if (candidate.value < best.value) best = candidate;
  }
  return best;
}

inline MetricResult reproj_s_metric(const Pose& est, const Pose& gt,
                                    const std::vector<Vec3>& points, const CameraIntrinsics& intr,
                                    const SymmetrySet& symmetry, double threshold_px = 5.0) {
  auto fn = [&](const Pose& e, const Pose& g) {
    return reproj_metric(e, g, points, intr, threshold_px);
  };
  return symmetric_metric(fn, est, gt, symmetry);
}

inline MetricResult adds_s_metric(const Pose& est, const Pose& gt, const std::vector<Vec3>& points,
                                  double diameter, const SymmetrySet& symmetry) {
  auto fn = [&](const Pose& e, const Pose& g) { return adds_metric(e, g, points, diameter); };
  return symmetric_metric(fn, est, gt, symmetry);
}

inline MetricResult add_s_metric(const Pose& est, const Pose& gt, const std::vector<Vec3>& points,
                                 double diameter, const SymmetrySet& symmetry) {
  auto fn = [&](const Pose& e, const Pose& g) { return add_metric(e, g, points, diameter); };
  return symmetric_metric(fn, est, gt, symmetry);
}

// The rotation error is minimized over symmetries; the translation error is
// unaffected by object-frame rotations.
inline DegCmResult deg_cm_s_metric(const Pose& est, const Pose& gt, const SymmetrySet& symmetry,
                                   double deg_threshold = 5.0, double cm_threshold = 5.0) {
  symmetry.validate();
  DegCmResult best;
  best.rot_err_deg = std::numeric_limits<double>::infinity();
  for (const auto& s : symmetry.rotations) {
    const DegCmResult r =
        deg_cm_metric(est, compose_symmetry(gt, s), deg_threshold, cm_threshold);
    if (r.rot_err_deg < best.rot_err_deg) best = r;
  }
  return best;
}

// One evaluated instance: every metric value plus its acceptance flag.
struct MetricVerdict {
  double add_value = 0.0;
  double adds_value = 0.0;
  double reproj_value = 0.0;
  double rot_err = 0.0;
  double trans_err = 0.0;
  double reproj_s_value = 0.0;
  double rot_err_s = 0.0;
  bool add_ok = false, adds_ok = false, reproj_ok = false, degcm_ok = false;
  bool reproj_s_ok = false, degcm_s_ok = false;
};

inline MetricVerdict evaluate_instance(const Pose& est, const Pose& gt,
                                       const std::vector<Vec3>& points, double diameter,
                                       const CameraIntrinsics& intr, const SymmetrySet& symmetry) {
  MetricVerdict v;
  const MetricResult add = add_metric(est, gt, points, diameter);
  const MetricResult adds = adds_metric(est, gt, points, diameter);
  const MetricResult rp = reproj_metric(est, gt, points, intr);
  const DegCmResult dc = deg_cm_metric(est, gt);
  const MetricResult rps = reproj_s_metric(est, gt, points, intr, symmetry);
  const DegCmResult dcs = deg_cm_s_metric(est, gt, symmetry);
  v.add_value = add.value;
  v.add_ok = add.accepted;
  v.adds_value = adds.value;
  v.adds_ok = adds.accepted;
  v.reproj_value = rp.value;
  v.reproj_ok = rp.accepted;
  v.rot_err = dc.rot_err_deg;
  v.trans_err = dc.trans_err_m;
  v.degcm_ok = dc.accepted;
  v.reproj_s_value = rps.value;
  v.reproj_s_ok = rps.accepted;
  v.rot_err_s = dcs.rot_err_deg;
  v.degcm_s_ok = dcs.accepted;
  return v;
}

// Percentage of accepted instances for the selected metric.
inline double recall(const std::vector<MetricVerdict>& verdicts,
                     const std::function<bool(const MetricVerdict&)>& selector) {
  require(!verdicts.empty(), "recall: empty verdict list");
  int accepted = 0;
  for (const auto& v : verdicts) accepted += selector(v) ? 1 : 0;
  return 100.0 * accepted / double(verdicts.size());
}

// The "Mean" row convention: unweighted mean of per-object recalls.
inline double mean_recall(const std::vector<double>& per_object_recalls) {
  require(!per_object_recalls.empty(), "mean_recall: empty list");
  double sum = 0.0;
  for (double r : per_object_recalls) sum += r;
  return sum / double(per_object_recalls.size());
}

}  // namespace ppc

#pragma once

#include <cmath>

#include "ppc/common.hpp"

namespace ppc {

// Rigid pose of the object in the camera frame.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  double depth() const { return translation.z(); }
};

// Local parameterization around a reference pose: axis-angle rotation offset,
// lateral offset of the projected center in reference-patch pixels, and log
// depth ratio.
struct PoseDelta {
  Vec3 theta_r = Vec3::Zero();   // radians
  Vec2 theta_l = Vec2::Zero();   // patch pixels
  double theta_d = 0.0;          // log depth ratio

  Vec6 as_vector() const {
    Vec6 v;
    v << theta_r.x(), theta_r.y(), theta_r.z(), theta_l.x(), theta_l.y(), theta_d;
    return v;
  }

  static PoseDelta from_vector(const Vec6& v) {
    PoseDelta d;
    d.theta_r = Vec3(v[0], v[1], v[2]);
    d.theta_l = Vec2(v[3], v[4]);
    d.theta_d = v[5];
    return d;
  }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

// Exponential map of so(3). Rodrigues closed form with a Taylor fallback for
// tiny angles where sin(t)/t and (1-cos(t))/t^2 lose precision.
inline Mat3 so3_exp(const Vec3& axis_angle) {
  require(axis_angle.allFinite(), "so3_exp: non-finite input");
  const double t2 = axis_angle.squaredNorm();
  const double t = std::sqrt(t2);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (t < 1e-8) {
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / t2;
  }
  const Mat3 k = skew(axis_angle);
  return Mat3::Identity() + a * k + b * (k * k);
}

// Geodesic distance between the two rotations, in degrees.
inline double rotation_angle_between(const Pose& a, const Pose& b) {
  const double c = ((a.rotation * b.rotation.transpose()).trace() - 1.0) * 0.5;
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

inline bool is_valid_rotation(const Mat3& r, double tol = 1e-9) {
  return ((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace ppc

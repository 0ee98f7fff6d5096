#pragma once

#include <cmath>
#include <cstdint>

#include "ppc/geometry.hpp"
#include "ppc/random.hpp"

namespace ppc {

struct ProposalSamplerConfig {
  double p_rotation = 0.30;
  double p_lateral = 0.30;
  double p_depth = 0.40;
  double rotation_sigma_deg = 45.0;
  double lateral_sigma_fraction = 0.1;  // of the object diameter, meters
  double depth_log_sigma = 0.0488;      // see README on the log-normal spread
  std::uint64_t seed = 0;

  void validate() const {
    require(p_rotation >= 0.0 && p_lateral >= 0.0 && p_depth >= 0.0,
            "proposal sampler: probabilities must be nonnegative");
    require(std::abs(p_rotation + p_lateral + p_depth - 1.0) < 1e-9,
            "proposal sampler: probabilities must sum to 1");
  }
};

enum class PerturbationKind { rotation = 0, lateral = 1, depth = 2 };

struct ProposalSample {
  Pose pose;
  PerturbationKind kind = PerturbationKind::rotation;
  double rotation_angle_rad = 0.0;  // signed draw, rotation category
  double lateral_distance_m = 0.0;  // magnitude draw, lateral category
  double depth_multiplier = 1.0;    // depth category
};

inline Vec3 random_unit_vector(Rng& rng) {
  while (true) {
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

// One ground-truth perturbation per draw: a rotation about a random axis
// through the object center (30 %), a lateral in-plane translation (30 %), or
// a relative depth change (40 %).
inline ProposalSample sample_proposal(const Pose& gt, double diameter,
                                      const ProposalSamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!(gt.depth() > 0.0)) throw BehindCameraError("sample_proposal: gt has non-positive depth");
  ProposalSample out;
  out.pose = gt;
  const double u = rng.uniform();
  if (u < cfg.p_rotation) {
    out.kind = PerturbationKind::rotation;
    const Vec3 axis = random_unit_vector(rng);
    const double sigma = cfg.rotation_sigma_deg * M_PI / 180.0;
    double angle = 0.0;
    do {
      angle = rng.normal(0.0, sigma);
    } while (std::abs(angle) > M_PI);  // truncate at +-180 degrees
    out.rotation_angle_rad = angle;
    out.pose.rotation = so3_exp(axis * angle) * gt.rotation;
  } else if (u < cfg.p_rotation + cfg.p_lateral) {
    out.kind = PerturbationKind::lateral;
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    out.lateral_distance_m = std::abs(rng.normal(0.0, cfg.lateral_sigma_fraction * diameter));
    out.pose.translation +=
        Vec3(out.lateral_distance_m * std::cos(phi), out.lateral_distance_m * std::sin(phi), 0.0);
  } else {
    out.kind = PerturbationKind::depth;
    out.depth_multiplier = rng.lognormal(0.0, cfg.depth_log_sigma);
    out.pose.translation *= out.depth_multiplier;  // direction kept, depth scaled
  }
  return out;
}

// Proposals with negative depth are mapped to the mirrored pose with the same
// projection: the translation flips sign and the object is rotated 180
// degrees about the camera's principal axis.
inline Pose correct_negative_depth(const Pose& p) {
  if (p.depth() > 0.0) return p;
  if (p.depth() == 0.0) throw DegeneratePoseError("correct_negative_depth: depth is exactly zero");
  Mat3 flip_z;  // R_z(pi)
  flip_z << -1, 0, 0,
             0, -1, 0,
             0, 0, 1;
  Pose out;
  out.rotation = flip_z * p.rotation;
  out.translation = -p.translation;
  return out;
}

}  // namespace ppc

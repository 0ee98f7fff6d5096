#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ppc/camera.hpp"
#include "ppc/geometry.hpp"
#include "ppc/random.hpp"

namespace ppc {

// Ground-truth handle handed to critics that are allowed to peek at the
// scene (the oracle family). Image-only critics ignore it.
struct SceneContext {
  Pose pose_hat;
  Pose pose_true;
  const std::vector<Vec3>* points = nullptr;
  ZoomedCamera zoom_hat;
  PoseDelta delta;  // parameterization of pose_hat around the reference frame
  bool has_ground_truth = false;
};

struct CriticRequest {
  const ImagePatch* observed = nullptr;
  const ImagePatch* rendered = nullptr;
  const SceneContext* context = nullptr;
};

class Critic {
 public:
  virtual ~Critic() = default;
  virtual double evaluate(const CriticRequest& req) = 0;
  virtual std::string name() const = 0;
};

// Mean patch-pixel distance between the model points projected under the
// estimated and the true pose, both through the estimated pose's patch
// camera.
inline double oracle_error(const Pose& pose_hat, const Pose& pose_true,
                           const std::vector<Vec3>& points, const ZoomedCamera& zoom_hat) {
  require(!points.empty(), "oracle_error: at least one model point required");
  double sum = 0.0;
  for (const Vec3& p : points) {
    const Vec2 a = project_to_patch(zoom_hat, pose_hat, p);
    const Vec2 b = project_to_patch(zoom_hat, pose_true, p);
    sum += (a - b).norm();
  }
  return sum / double(points.size());
}

class OracleCritic final : public Critic {
 public:
  double evaluate(const CriticRequest& req) override {
    require(req.context != nullptr && req.context->has_ground_truth,
            "oracle critic requires a scene context with ground truth");
    const SceneContext& ctx = *req.context;
    return oracle_error(ctx.pose_hat, ctx.pose_true, *ctx.points, ctx.zoom_hat);
  }
  std::string name() const override { return "oracle"; }
};

struct NoisyCriticConfig {
  double noise_sigma = 1.0;      // patch pixels
  double bias_amplitude = 5.0;   // patch pixels
  // smooth-bias length scales per parameter block: radians, patch pixels,
  // log-depth units
  double bias_scale_rot = 0.8;
  double bias_scale_lat = 100.0;
  double bias_scale_depth = 1.0;
  double saturation = 50.0;      // patch pixels
  std::uint64_t seed = 0;
};

// Oracle plus a smooth deterministic bias over the pose delta and clamped,
// reproducible evaluation noise. Emulates the output surface of a trained
// critic without modeling one.
class NoisyCritic final : public Critic {
 public:
  explicit NoisyCritic(const NoisyCriticConfig& cfg) : cfg_(cfg) {
    require(cfg.saturation > 0.0, "noisy critic: saturation must be positive");
    require(cfg.noise_sigma >= 0.0, "noisy critic: noise_sigma must be nonnegative");
    // three low-frequency cosine bumps per parameter axis
    Rng rng(hash_combine(0x6e6f6973ull, cfg.seed));
    double total = 0.0;
    for (int axis = 0; axis < 6; ++axis) {
      const double scale = axis < 3 ? cfg.bias_scale_rot
                         : axis < 5 ? cfg.bias_scale_lat
                                    : cfg.bias_scale_depth;
      for (int k = 0; k < 3; ++k) {
        Term t;
        t.axis = axis;
        t.omega = 2.0 * M_PI * 0.5 * (k + 1) / scale;
        t.coeff = rng.uniform(0.5, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        t.phase = rng.uniform(0.0, 2.0 * M_PI);
        total += std::abs(t.coeff);
        terms_.push_back(t);
      }
    }
    norm_ = total > 0.0 ? cfg.bias_amplitude / total : 0.0;
  }

  double bias(const PoseDelta& delta) const {
    const Vec6 v = delta.as_vector();
    double b = 0.0;
    for (const Term& t : terms_) b += t.coeff * std::cos(t.omega * v[t.axis] + t.phase);
    return norm_ * b;
  }

  double evaluate(const CriticRequest& req) override {
    require(req.context != nullptr && req.context->has_ground_truth,
            "noisy critic requires a scene context with ground truth");
    const SceneContext& ctx = *req.context;
    double value = oracle_error(ctx.pose_hat, ctx.pose_true, *ctx.points, ctx.zoom_hat);
    value += bias(ctx.delta);
    if (cfg_.noise_sigma > 0.0) {
      // counter-based draw keyed by the quantized delta: identical deltas see
      // identical noise
      std::uint64_t key = hash_combine(0x65707344ull, cfg_.seed);
      const Vec6 v = ctx.delta.as_vector();
      for (int i = 0; i < 6; ++i)
        key = hash_combine(key, std::uint64_t(std::llround(v[i] * 1e9)));
      value += cfg_.noise_sigma * counter_normal(key);
    }
    return std::clamp(value, 0.0, cfg_.saturation);
  }

  std::string name() const override { return "noisy"; }

 private:
  struct Term {
    int axis;
    double omega, coeff, phase;
  };
  NoisyCriticConfig cfg_;
  std::vector<Term> terms_;
  double norm_ = 0.0;
};

}  // namespace ppc

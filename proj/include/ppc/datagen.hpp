#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ppc/image_io.hpp"
#include "ppc/rasterizer.hpp"
#include "ppc/random.hpp"
#include "ppc/serialization.hpp"
#include "ppc/shapes.hpp"

namespace ppc {

struct Range {
  double lo = 0.0, hi = 0.0;
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

struct DatagenConfig {
  // light position offset from the camera center, camera frame, meters
  Vec3 light_lo = Vec3(-0.6, -0.6, -0.3);
  Vec3 light_hi = Vec3(0.6, 0.6, 0.3);
  // Phong randomization ranges (non-paper defaults, recorded here)
  Range ambient{0.2, 0.5};
  Range diffuse{0.5, 1.0};
  Range specular{0.0, 0.5};
  Range shininess{5.0, 80.0};
  Range whiteness{0.0, 1.0};
  double occluder_probability = 0.5;
  int occluder_count = 2;
  int min_visible_pixels = 200;
  int max_visibility_attempts = 100;
  double occluded_to_background_probability = 0.5;
  Range border_blur_sigma{1.0, 2.0};
  Range object_blur_sigma{0.0, 1.2};
  bool hsv_noise = false;  // synthetic-only training mode
  double hsv_amp_h = 0.02, hsv_amp_s = 0.08, hsv_amp_v = 0.08;
  // target pose sampling
  Range target_depth{0.7, 1.1};
  double center_margin_fraction = 0.30;  // projected center kept inside the margins
  std::string background_dir;            // empty -> built-in textures
  std::uint64_t seed = 0;
};

struct OccluderRecord {
  std::string object_id;
  Pose pose;
};

struct FrameGroundTruth {
  int frame_id = 0;
  std::string object_id;
  Pose pose;
  int visible_pixels = 0;
  bool has_occluders = false;
  bool occluded_to_background = false;
  std::vector<OccluderRecord> occluders;
};

namespace detail {

// Uniform rotation via Shoemake's quaternion method.
inline Mat3 random_rotation(Rng& rng) {
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double qx = a * std::sin(2 * M_PI * u2);
  const double qy = a * std::cos(2 * M_PI * u2);
  const double qz = b * std::sin(2 * M_PI * u3);
  const double qw = b * std::cos(2 * M_PI * u3);
  Mat3 r;
  r << 1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw),
      2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw),
      2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy);
  return r;
}

inline Image make_texture(int kind, int size = 512) {
  Image img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      float r = 0, g = 0, b = 0;
      const double u = double(x) / size, v = double(y) / size;
      switch (kind) {
        case 0: {  // checker
          const bool on = ((x / 32) + (y / 32)) % 2 == 0;
          r = on ? 0.72f : 0.25f; g = on ? 0.65f : 0.30f; b = on ? 0.50f : 0.38f;
          break;
        }
        case 1: {  // diagonal stripes
          const bool on = ((x + y) / 24) % 2 == 0;
          r = on ? 0.18f : 0.60f; g = on ? 0.35f : 0.55f; b = on ? 0.45f : 0.20f;
          break;
        }
        case 2:  // horizontal gradient
          r = float(u); g = float(0.4 + 0.3 * u); b = float(1.0 - u);
          break;
        case 3: {  // radial gradient
          const double d = std::hypot(u - 0.5, v - 0.5) * 1.6;
          r = float(0.8 - 0.5 * d); g = float(0.4 + 0.3 * d); b = float(0.3 + 0.4 * d);
          break;
        }
        case 4: {  // hash value noise
          const std::uint64_t h = mix64((std::uint64_t(x / 8) << 32) | std::uint64_t(y / 8));
          r = float((h & 0xff) / 255.0 * 0.6 + 0.2);
          g = float(((h >> 8) & 0xff) / 255.0 * 0.6 + 0.2);
          b = float(((h >> 16) & 0xff) / 255.0 * 0.6 + 0.2);
          break;
        }
        case 5:  // blobs
          r = float(0.5 + 0.4 * std::sin(9.0 * u) * std::sin(7.0 * v));
          g = float(0.5 + 0.4 * std::sin(6.0 * u + 1.0) * std::sin(11.0 * v));
          b = float(0.5 + 0.4 * std::sin(13.0 * u + 2.0) * std::sin(5.0 * v));
          break;
        case 6: {  // vertical bars
          const std::uint64_t h = mix64(std::uint64_t(x / 20) * 7919u);
          r = float((h & 0xff) / 255.0);
          g = float(((h >> 8) & 0xff) / 255.0);
          b = float(((h >> 16) & 0xff) / 255.0);
          break;
        }
        default:  // plasma
          r = float(0.5 + 0.5 * std::sin(20.0 * u + 3.0 * std::sin(5.0 * v)));
          g = float(0.5 + 0.5 * std::sin(15.0 * v + 4.0 * std::sin(6.0 * u)));
          b = float(0.5 + 0.5 * std::sin(10.0 * (u + v)));
          break;
      }
      img.set(x, y, std::clamp(r, 0.0f, 1.0f), std::clamp(g, 0.0f, 1.0f),
              std::clamp(b, 0.0f, 1.0f));
    }
  }
  return img;
}

}  // namespace detail

// Eight deterministic textures standing in for a real background image pool.
inline std::vector<Image> builtin_backgrounds(int size = 512) {
  std::vector<Image> out;
  for (int k = 0; k < 8; ++k) out.push_back(detail::make_texture(k, size));
  return out;
}

inline std::vector<Image> load_backgrounds(const std::string& dir) {
  if (dir.empty()) return builtin_backgrounds();
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> out;
  for (const auto& f : files) out.push_back(load_image(f.string()));
  if (out.empty()) throw DatagenError("background pool is empty: " + dir);
  return out;
}

struct GeneratedFrame {
  Image image;
  FrameGroundTruth gt;
};

// One synthetic observed frame: randomized Phong render of the target (plus
// occluders half the time), visibility-constrained, composited over a random
// background with a blurred border, object blur and optional HSV noise.
inline GeneratedFrame generate_frame(const TriangleMesh& target, const std::string& target_id,
                                     const Pose& gt_pose,
                                     const std::vector<const TriangleMesh*>& occluder_pool,
                                     const std::vector<std::string>& occluder_ids,
                                     const std::vector<Image>& backgrounds,
                                     const CameraIntrinsics& intr, const DatagenConfig& cfg,
                                     Rng& rng) {
  require(!backgrounds.empty(), "generate_frame: background pool is empty");
  require(occluder_pool.size() == occluder_ids.size(),
          "generate_frame: occluder pool/id size mismatch");

  ShadingParams shading;
  shading.mode = ShadingParams::Mode::phong;
  shading.light_position = Vec3(rng.uniform(cfg.light_lo.x(), cfg.light_hi.x()),
                                rng.uniform(cfg.light_lo.y(), cfg.light_hi.y()),
                                rng.uniform(cfg.light_lo.z(), cfg.light_hi.z()));
  shading.ambient = cfg.ambient.sample(rng);
  shading.diffuse = cfg.diffuse.sample(rng);
  shading.specular = cfg.specular.sample(rng);
  shading.shininess = cfg.shininess.sample(rng);
  shading.whiteness = cfg.whiteness.sample(rng);

  GeneratedFrame out;
  out.gt.object_id = target_id;
  out.gt.pose = gt_pose;
  out.gt.has_occluders = !occluder_pool.empty() && cfg.occluder_count > 0 &&
                         rng.bernoulli(cfg.occluder_probability);

  const PinholeView view = view_from_intrinsics(intr);
  std::vector<SceneObject> scene = {{&target, gt_pose}};
  SceneRender joint;

  if (out.gt.has_occluders) {
    const SceneRender solo = rasterize_scene(scene, view, shading);
    const int solo_visible = solo.count_winner(0);
    if (solo_visible < cfg.min_visible_pixels)
      throw DatagenError("target projects to only " + std::to_string(solo_visible) +
                         " pixels; the visibility constraint cannot be met");
    bool satisfied = false;
    for (int attempt = 0; attempt < cfg.max_visibility_attempts && !satisfied; ++attempt) {
      scene.resize(1);
      out.gt.occluders.clear();
      for (int k = 0; k < cfg.occluder_count; ++k) {
        const size_t pick = rng.uniform_index(occluder_pool.size());
        Pose opose;
        opose.rotation = detail::random_rotation(rng);
        // in front of the target, near its viewing ray
        const double depth = rng.uniform(0.6, 0.9) * gt_pose.depth();
        const Vec3 along_ray = gt_pose.translation * (depth / gt_pose.depth());
        const double jitter = 0.35 * target.diameter;
        opose.translation = along_ray + Vec3(rng.normal(0.0, jitter), rng.normal(0.0, jitter), 0.0);
        scene.push_back({occluder_pool[pick], opose});
        out.gt.occluders.push_back({occluder_ids[pick], opose});
      }
      joint = rasterize_scene(scene, view, shading);
      out.gt.visible_pixels = joint.count_winner(0);
      satisfied = out.gt.visible_pixels >= cfg.min_visible_pixels;
    }
    if (!satisfied)
      throw DatagenError("could not satisfy the minimum visible pixel constraint after " +
                         std::to_string(cfg.max_visibility_attempts) + " attempts");
  } else {
    joint = rasterize_scene(scene, view, shading);
    out.gt.visible_pixels = joint.count_winner(0);
  }

  out.gt.occluded_to_background =
      out.gt.has_occluders && rng.bernoulli(cfg.occluded_to_background_probability);

  // Foreground layer: everything rendered, or only the unoccluded part of the
  // target when the occluded region is made transparent.
  std::vector<float> alpha(joint.winner.size());
  for (size_t i = 0; i < joint.winner.size(); ++i)
    alpha[i] = out.gt.occluded_to_background ? (joint.winner[i] == 0 ? 1.0f : 0.0f)
                                             : (joint.winner[i] >= 0 ? 1.0f : 0.0f);

  const Image& bg_src = backgrounds[rng.uniform_index(backgrounds.size())];
  Image bg = (bg_src.width == intr.width && bg_src.height == intr.height)
                 ? bg_src
                 : resize_bilinear(bg_src, intr.width, intr.height);

  Image composite(intr.width, intr.height);
  for (size_t i = 0; i < alpha.size(); ++i)
    for (int c = 0; c < 3; ++c)
      composite.data[3 * i + c] =
          alpha[i] > 0.5f ? joint.color.data[3 * i + c] : bg.data[3 * i + c];

  // Border blend: mix with a blurred copy in the band around the silhouette.
  const double border_sigma = cfg.border_blur_sigma.sample(rng);
  if (border_sigma > 0.01) {
    const Image blurred = gaussian_blur(composite, border_sigma);
    const auto soft = gaussian_blur_plane(alpha, intr.width, intr.height, border_sigma);
    for (size_t i = 0; i < alpha.size(); ++i) {
      const float w = 4.0f * soft[i] * (1.0f - soft[i]);
      for (int c = 0; c < 3; ++c)
        composite.data[3 * i + c] =
            w * blurred.data[3 * i + c] + (1.0f - w) * composite.data[3 * i + c];
    }
  }

  // Blur over the object of interest.
  const double object_sigma = cfg.object_blur_sigma.sample(rng);
  if (object_sigma > 0.05) {
    std::vector<float> target_mask(joint.winner.size());
    for (size_t i = 0; i < joint.winner.size(); ++i)
      target_mask[i] = joint.winner[i] == 0 ? 1.0f : 0.0f;
    const Image blurred = gaussian_blur(composite, object_sigma);
    const auto m = gaussian_blur_plane(target_mask, intr.width, intr.height, object_sigma);
    for (size_t i = 0; i < m.size(); ++i)
      for (int c = 0; c < 3; ++c)
        composite.data[3 * i + c] =
            m[i] * blurred.data[3 * i + c] + (1.0f - m[i]) * composite.data[3 * i + c];
  }

  if (cfg.hsv_noise) {
    const float dh = float(rng.uniform(-cfg.hsv_amp_h, cfg.hsv_amp_h));
    const float ds = float(rng.uniform(-cfg.hsv_amp_s, cfg.hsv_amp_s));
    const float dv = float(rng.uniform(-cfg.hsv_amp_v, cfg.hsv_amp_v));
    for (size_t i = 0; i < alpha.size(); ++i) {
      float* p = &composite.data[3 * i];
      auto hsv = rgb_to_hsv(p[0], p[1], p[2]);
      hsv[0] = std::fmod(hsv[0] + dh + 1.0f, 1.0f);
      hsv[1] = std::clamp(hsv[1] + ds, 0.0f, 1.0f);
      hsv[2] = std::clamp(hsv[2] + dv, 0.0f, 1.0f);
      const auto rgb = hsv_to_rgb(hsv[0], hsv[1], hsv[2]);
      p[0] = rgb[0]; p[1] = rgb[1]; p[2] = rgb[2];
    }
  }

  for (float& v : composite.data) v = std::clamp(v, 0.0f, 1.0f);
  out.image = std::move(composite);
  return out;
}

// Uniform random target pose: projected center inside the image margins,
// depth in range, uniform orientation.
inline Pose sample_target_pose(const CameraIntrinsics& intr, const DatagenConfig& cfg, Rng& rng) {
  Pose pose;
  pose.rotation = detail::random_rotation(rng);
  const double depth = cfg.target_depth.sample(rng);
  const double mx = cfg.center_margin_fraction * intr.width;
  const double my = cfg.center_margin_fraction * intr.height;
  const double u = rng.uniform(mx, intr.width - mx);
  const double v = rng.uniform(my, intr.height - my);
  pose.translation =
      Vec3((u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth);
  return pose;
}

struct DatasetSpec {
  std::vector<std::string> object_names;  // built-in names or mesh paths
  int n_frames = 0;
  CameraIntrinsics intrinsics;
  DatagenConfig config;
};

inline json datagen_config_to_json(const DatagenConfig& c) {
  return {{"light_lo", {c.light_lo.x(), c.light_lo.y(), c.light_lo.z()}},
          {"light_hi", {c.light_hi.x(), c.light_hi.y(), c.light_hi.z()}},
          {"ambient", {c.ambient.lo, c.ambient.hi}},
          {"diffuse", {c.diffuse.lo, c.diffuse.hi}},
          {"specular", {c.specular.lo, c.specular.hi}},
          {"shininess", {c.shininess.lo, c.shininess.hi}},
          {"whiteness", {c.whiteness.lo, c.whiteness.hi}},
          {"occluder_probability", c.occluder_probability},
          {"occluder_count", c.occluder_count},
          {"min_visible_pixels", c.min_visible_pixels},
          {"max_visibility_attempts", c.max_visibility_attempts},
          {"occluded_to_background_probability", c.occluded_to_background_probability},
          {"border_blur_sigma", {c.border_blur_sigma.lo, c.border_blur_sigma.hi}},
          {"object_blur_sigma", {c.object_blur_sigma.lo, c.object_blur_sigma.hi}},
          {"hsv_noise", c.hsv_noise},
          {"hsv_amplitudes", {c.hsv_amp_h, c.hsv_amp_s, c.hsv_amp_v}},
          {"target_depth", {c.target_depth.lo, c.target_depth.hi}},
          {"center_margin_fraction", c.center_margin_fraction},
          {"background_dir", c.background_dir},
          {"seed", c.seed}};
}

inline DatagenConfig datagen_config_from_json(const json& j) {
  DatagenConfig c;
  auto range = [&](const char* key, Range& r) {
    if (!j.contains(key)) return;
    r.lo = j.at(key).at(0).get<double>();
    r.hi = j.at(key).at(1).get<double>();
  };
  if (j.contains("light_lo")) {
    const auto& l = j.at("light_lo");
    c.light_lo = Vec3(l.at(0), l.at(1), l.at(2));
  }
  if (j.contains("light_hi")) {
    const auto& l = j.at("light_hi");
    c.light_hi = Vec3(l.at(0), l.at(1), l.at(2));
  }
  range("ambient", c.ambient);
  range("diffuse", c.diffuse);
  range("specular", c.specular);
  range("shininess", c.shininess);
  range("whiteness", c.whiteness);
  c.occluder_probability = j.value("occluder_probability", c.occluder_probability);
  c.occluder_count = j.value("occluder_count", c.occluder_count);
  c.min_visible_pixels = j.value("min_visible_pixels", c.min_visible_pixels);
  c.max_visibility_attempts = j.value("max_visibility_attempts", c.max_visibility_attempts);
  c.occluded_to_background_probability =
      j.value("occluded_to_background_probability", c.occluded_to_background_probability);
  range("border_blur_sigma", c.border_blur_sigma);
  range("object_blur_sigma", c.object_blur_sigma);
  c.hsv_noise = j.value("hsv_noise", c.hsv_noise);
  if (j.contains("hsv_amplitudes")) {
    const auto& a = j.at("hsv_amplitudes");
    c.hsv_amp_h = a.at(0);
    c.hsv_amp_s = a.at(1);
    c.hsv_amp_v = a.at(2);
  }
  range("target_depth", c.target_depth);
  c.center_margin_fraction = j.value("center_margin_fraction", c.center_margin_fraction);
  c.background_dir = j.value("background_dir", c.background_dir);
  c.seed = j.value("seed", c.seed);
  return c;
}

inline TriangleMesh load_object(const std::string& name) {
  if (name.find('.') != std::string::npos || name.find('/') != std::string::npos)
    return load_mesh_with_metadata(name);
  return shapes::make_builtin(name);
}

// Write a full dataset: images/NNNNNN.png, gt.json, camera.json and a
// manifest that pins the configuration and seed. Per-frame seeds are derived
// from (seed, frame index), so regeneration is reproducible frame by frame.
inline void generate_dataset(const DatasetSpec& spec, const std::string& out_dir) {
  require(spec.n_frames >= 1, "generate_dataset: n_frames must be >= 1");
  require(!spec.object_names.empty(), "generate_dataset: at least one object required");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");

  std::vector<TriangleMesh> meshes;
  for (const auto& name : spec.object_names) meshes.push_back(load_object(name));
  const std::vector<Image> backgrounds = load_backgrounds(spec.config.background_dir);

  json manifest = {{"objects", spec.object_names},
                   {"n_frames", spec.n_frames},
                   {"camera", intrinsics_to_json(spec.intrinsics)},
                   {"datagen", datagen_config_to_json(spec.config)}};
  manifest["config_hash"] = config_hash(manifest);

  json frames = json::array();
  for (int f = 0; f < spec.n_frames; ++f) {
    Rng rng(hash_combine(spec.config.seed, std::uint64_t(f)));
    const int target_idx = f % int(meshes.size());
    std::vector<const TriangleMesh*> pool;
    std::vector<std::string> pool_ids;
    for (int k = 0; k < int(meshes.size()); ++k) {
      if (k == target_idx) continue;
      pool.push_back(&meshes[k]);
      pool_ids.push_back(spec.object_names[k]);
    }
    const Pose gt_pose = sample_target_pose(spec.intrinsics, spec.config, rng);
    GeneratedFrame frame = generate_frame(meshes[target_idx], spec.object_names[target_idx],
                                          gt_pose, pool, pool_ids, backgrounds, spec.intrinsics,
                                          spec.config, rng);
    frame.gt.frame_id = f;

    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", f);
    write_binary_file((fs::path(out_dir) / "images" / name).string(),
                      encode_png(frame.image));

    json occluders = json::array();
    for (const auto& o : frame.gt.occluders)
      occluders.push_back({{"object_id", o.object_id}, {"pose", pose_to_json(o.pose)}});
    frames.push_back({{"frame_id", frame.gt.frame_id},
                      {"object_id", frame.gt.object_id},
                      {"pose", pose_to_json(frame.gt.pose)},
                      {"visible_pixels", frame.gt.visible_pixels},
                      {"has_occluders", frame.gt.has_occluders},
                      {"occluded_to_background", frame.gt.occluded_to_background},
                      {"occluders", occluders}});
  }

  write_json_file((fs::path(out_dir) / "gt.json").string(),
                  json{{"frames", frames}, {"config_hash", manifest["config_hash"]}});
  write_json_file((fs::path(out_dir) / "camera.json").string(),
                  intrinsics_to_json(spec.intrinsics));
  write_json_file((fs::path(out_dir) / "manifest.json").string(), manifest);
}

inline DatasetSpec dataset_spec_from_manifest(const std::string& manifest_path) {
  const json m = load_json_file(manifest_path);
  DatasetSpec spec;
  spec.object_names = m.at("objects").get<std::vector<std::string>>();
  spec.n_frames = m.at("n_frames").get<int>();
  spec.intrinsics = intrinsics_from_json(m.at("camera"));
  spec.config = datagen_config_from_json(m.at("datagen"));
  return spec;
}

}  // namespace ppc

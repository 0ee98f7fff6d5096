#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ppc/camera.hpp"
#include "ppc/critic.hpp"
#include "ppc/geometry.hpp"
#include "ppc/mesh.hpp"
#include "ppc/metrics.hpp"
#include "ppc/optimizer.hpp"
#include "ppc/proposals.hpp"

namespace ppc {

using json = nlohmann::json;

inline json pose_to_json(const Pose& pose) {
  json r = json::array();
  for (int i = 0; i < 3; ++i)
    r.push_back({pose.rotation(i, 0), pose.rotation(i, 1), pose.rotation(i, 2)});
  return {{"R", r},
          {"t", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

inline Pose pose_from_json(const json& j, bool validate_rotation = true) {
  Pose pose;
  const auto& r = j.at("R");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) pose.rotation(i, k) = r.at(i).at(k).get<double>();
  const auto& t = j.at("t");
  pose.translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
  require(pose.translation.allFinite() && pose.rotation.allFinite(),
          "pose: non-finite entries");
  if (validate_rotation)
    require(is_valid_rotation(pose.rotation, 1e-6), "pose: R is not a rotation matrix");
  return pose;
}

inline json intrinsics_to_json(const CameraIntrinsics& intr) {
  return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
          {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
}

inline CameraIntrinsics intrinsics_from_json(const json& j) {
  CameraIntrinsics intr;
  intr.fx = j.at("fx").get<double>();
  intr.fy = j.at("fy").get<double>();
  intr.cx = j.at("cx").get<double>();
  intr.cy = j.at("cy").get<double>();
  intr.width = j.at("width").get<int>();
  intr.height = j.at("height").get<int>();
  require(intr.fx > 0 && intr.fy > 0 && intr.width >= 1 && intr.height >= 1,
          "intrinsics: invalid values");
  return intr;
}

// Model metadata sidecar ("<mesh>.json"): {"diameter_m": float, "symmetries":
// [[wx,wy,wz], ...] } with axis-angle symmetry rotations (identity implied).
inline void apply_mesh_metadata(TriangleMesh& mesh, const json& j) {
  if (j.contains("diameter_m")) {
    const double d = j.at("diameter_m").get<double>();
    require(d > 0.0, "mesh metadata: diameter_m must be positive");
    mesh.diameter = d;
  }
  if (j.contains("symmetries")) {
    mesh.symmetries.clear();
    mesh.symmetries.push_back(Mat3::Identity());
    for (const auto& s : j.at("symmetries")) {
      const Vec3 aa(s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>());
      if (aa.norm() < 1e-12) continue;  // identity already present
      mesh.symmetries.push_back(so3_exp(aa));
    }
  }
}

inline TriangleMesh load_mesh_with_metadata(const std::string& path) {
  TriangleMesh mesh = load_mesh(path);
  const std::string sidecar = path + ".json";
  std::ifstream in(sidecar);
  if (in) {
    json j;
    in >> j;
    apply_mesh_metadata(mesh, j);
  }
  return mesh;
}

inline SymmetrySet symmetry_set_of(const TriangleMesh& mesh) {
  SymmetrySet s;
  s.rotations = mesh.symmetries;
  if (s.rotations.empty()) s.rotations.push_back(Mat3::Identity());
  return s;
}

inline json schedule_to_json(const Schedule& s) {
  json j = json::array();
  for (const auto& [it, mult] : s.breakpoints) j.push_back({it, mult});
  return j;
}

inline Schedule schedule_from_json(const json& j) {
  Schedule s;
  for (const auto& bp : j) {
    const double it = bp.at(0).get<double>();
    const double mult = bp.at(1).get<double>();
    require(std::isfinite(mult) && mult >= 0.0, "schedule: multipliers must be finite and >= 0");
    s.breakpoints.push_back({it, mult});
  }
  return s;
}

inline json refinement_config_to_json(const RefinementConfig& cfg) {
  return {{"iterations", cfg.iterations},
          {"finite_difference_steps",
           {{"rot", cfg.fd.rot}, {"lat", cfg.fd.lat}, {"depth", cfg.fd.depth}}},
          {"adam_rot",
           {{"beta1", cfg.adam_rot.beta1},
            {"beta2", cfg.adam_rot.beta2},
            {"epsilon", cfg.adam_rot.epsilon},
            {"base_step", cfg.adam_rot.base_step}}},
          {"adam_depth",
           {{"beta1", cfg.adam_depth.beta1},
            {"beta2", cfg.adam_depth.beta2},
            {"epsilon", cfg.adam_depth.epsilon},
            {"base_step", cfg.adam_depth.base_step}}},
          {"sgd_lateral", {{"momentum", cfg.sgd_momentum}, {"base_step", cfg.sgd_lat_step}}},
          {"schedules",
           {{"rot", schedule_to_json(cfg.sched_rot)},
            {"lat", schedule_to_json(cfg.sched_lat)},
            {"depth", schedule_to_json(cfg.sched_depth)}}},
          {"select_best_over_trace", cfg.select_best_over_trace}};
}

inline RefinementConfig refinement_config_from_json(const json& j) {
  RefinementConfig cfg;
  cfg.iterations = j.value("iterations", cfg.iterations);
  require(cfg.iterations >= 1, "refinement config: iterations must be >= 1");
  if (j.contains("finite_difference_steps")) {
    const auto& fd = j.at("finite_difference_steps");
    cfg.fd.rot = fd.value("rot", cfg.fd.rot);
    cfg.fd.lat = fd.value("lat", cfg.fd.lat);
    cfg.fd.depth = fd.value("depth", cfg.fd.depth);
  }
  auto read_adam = [&](const char* key, AdamConfig& a) {
    if (!j.contains(key)) return;
    const auto& ja = j.at(key);
    a.beta1 = ja.value("beta1", a.beta1);
    a.beta2 = ja.value("beta2", a.beta2);
    a.epsilon = ja.value("epsilon", a.epsilon);
    a.base_step = ja.value("base_step", a.base_step);
  };
  read_adam("adam_rot", cfg.adam_rot);
  read_adam("adam_depth", cfg.adam_depth);
  if (j.contains("sgd_lateral")) {
    cfg.sgd_momentum = j.at("sgd_lateral").value("momentum", cfg.sgd_momentum);
    cfg.sgd_lat_step = j.at("sgd_lateral").value("base_step", cfg.sgd_lat_step);
  }
  if (j.contains("schedules")) {
    const auto& s = j.at("schedules");
    if (s.contains("rot")) cfg.sched_rot = schedule_from_json(s.at("rot"));
    if (s.contains("lat")) cfg.sched_lat = schedule_from_json(s.at("lat"));
    if (s.contains("depth")) cfg.sched_depth = schedule_from_json(s.at("depth"));
  } else if (cfg.iterations != 100) {
    cfg.sched_rot = default_rotation_schedule(cfg.iterations);
    cfg.sched_lat = default_lateral_schedule(cfg.iterations);
    cfg.sched_depth = default_depth_schedule(cfg.iterations);
  }
  cfg.select_best_over_trace = j.value("select_best_over_trace", cfg.select_best_over_trace);
  return cfg;
}

inline json sampler_config_to_json(const ProposalSamplerConfig& cfg) {
  return {{"p_rotation", cfg.p_rotation},
          {"p_lateral", cfg.p_lateral},
          {"p_depth", cfg.p_depth},
          {"rotation_sigma_deg", cfg.rotation_sigma_deg},
          {"lateral_sigma_fraction", cfg.lateral_sigma_fraction},
          {"depth_log_sigma", cfg.depth_log_sigma},
          {"seed", cfg.seed}};
}

inline ProposalSamplerConfig sampler_config_from_json(const json& j) {
  ProposalSamplerConfig cfg;
  cfg.p_rotation = j.value("p_rotation", cfg.p_rotation);
  cfg.p_lateral = j.value("p_lateral", cfg.p_lateral);
  cfg.p_depth = j.value("p_depth", cfg.p_depth);
  cfg.rotation_sigma_deg = j.value("rotation_sigma_deg", cfg.rotation_sigma_deg);
  cfg.lateral_sigma_fraction = j.value("lateral_sigma_fraction", cfg.lateral_sigma_fraction);
  cfg.depth_log_sigma = j.value("depth_log_sigma", cfg.depth_log_sigma);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

inline json noisy_critic_config_to_json(const NoisyCriticConfig& cfg) {
  return {{"noise_sigma", cfg.noise_sigma},
          {"bias_amplitude", cfg.bias_amplitude},
          {"bias_scale_rot", cfg.bias_scale_rot},
          {"bias_scale_lat", cfg.bias_scale_lat},
          {"bias_scale_depth", cfg.bias_scale_depth},
          {"saturation", cfg.saturation},
          {"seed", cfg.seed}};
}

inline NoisyCriticConfig noisy_critic_config_from_json(const json& j) {
  NoisyCriticConfig cfg;
  cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
  cfg.bias_amplitude = j.value("bias_amplitude", cfg.bias_amplitude);
  cfg.bias_scale_rot = j.value("bias_scale_rot", cfg.bias_scale_rot);
  cfg.bias_scale_lat = j.value("bias_scale_lat", cfg.bias_scale_lat);
  cfg.bias_scale_depth = j.value("bias_scale_depth", cfg.bias_scale_depth);
  cfg.saturation = j.value("saturation", cfg.saturation);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

inline json trace_to_json(const RefinementTrace& trace) {
  json entries = json::array();
  for (const auto& e : trace.entries) {
    entries.push_back({{"theta_r", {e.delta.theta_r.x(), e.delta.theta_r.y(), e.delta.theta_r.z()}},
                       {"theta_l", {e.delta.theta_l.x(), e.delta.theta_l.y()}},
                       {"theta_d", e.delta.theta_d},
                       {"objective", e.objective},
                       {"multipliers", {e.mult_rot, e.mult_lat, e.mult_depth}}});
  }
  return {{"branch", trace.branch_id},
          {"entries", entries},
          {"final_pose", pose_to_json(trace.final_pose)},
          {"final_objective", trace.final_objective},
          {"eval_count", trace.eval_count}};
}

// FNV-1a over the canonical dump; pinned into outputs for provenance.
inline std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open JSON file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in " + path);
  return j;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ppc

#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ppc/datagen.hpp"
#include "ppc/external_critic.hpp"
#include "ppc/metrics.hpp"
#include "ppc/objective.hpp"
#include "ppc/optimizer.hpp"
#include "ppc/parallel.hpp"
#include "ppc/proposals.hpp"
#include "ppc/serialization.hpp"

namespace ppc {

struct PoseRecord {
  int frame_id = 0;
  std::string object_id;
  Pose pose;
};

inline bool operator<(const PoseRecord& a, const PoseRecord& b) {
  return std::tie(a.frame_id, a.object_id) < std::tie(b.frame_id, b.object_id);
}

// Accepts a bare list of {frame_id, object_id, pose} or an object wrapping it
// under "proposals"/"estimates"/"frames".
inline std::vector<PoseRecord> pose_records_from_json(const json& j, bool validate_rotation = true) {
  const json* list = &j;
  for (const char* key : {"proposals", "estimates", "frames"})
    if (j.is_object() && j.contains(key)) {
      list = &j.at(key);
      break;
    }
  std::vector<PoseRecord> out;
  for (const auto& e : *list) {
    if (e.contains("error")) continue;  // failed entries in a refined file
    PoseRecord r;
    r.frame_id = e.at("frame_id").get<int>();
    r.object_id = e.at("object_id").get<std::string>();
    r.pose = pose_from_json(e.at("pose"), validate_rotation);
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline json pose_records_to_json(const std::vector<PoseRecord>& records) {
  json list = json::array();
  for (const auto& r : records)
    list.push_back({{"frame_id", r.frame_id},
                    {"object_id", r.object_id},
                    {"pose", pose_to_json(r.pose)}});
  return list;
}

struct GtEntry {
  PoseRecord record;
  int visible_pixels = 0;
};

struct Dataset {
  CameraIntrinsics intrinsics;
  std::vector<GtEntry> gt;
  std::string dir;

  std::string image_path(int frame_id) const {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", frame_id);
    return (std::filesystem::path(dir) / "images" / name).string();
  }
};

inline Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  ds.dir = dir;
  ds.intrinsics = intrinsics_from_json(
      load_json_file((std::filesystem::path(dir) / "camera.json").string()));
  const json gt = load_json_file((std::filesystem::path(dir) / "gt.json").string());
  for (const auto& f : gt.at("frames")) {
    GtEntry e;
    e.record.frame_id = f.at("frame_id").get<int>();
    e.record.object_id = f.at("object_id").get<std::string>();
    e.record.pose = pose_from_json(f.at("pose"));
    e.visible_pixels = f.value("visible_pixels", 0);
    ds.gt.push_back(std::move(e));
  }
  std::sort(ds.gt.begin(), ds.gt.end(),
            [](const GtEntry& a, const GtEntry& b) { return a.record < b.record; });
  return ds;
}

// Cache of loaded meshes with bounded model point sets.
class MeshLibrary {
 public:
  explicit MeshLibrary(int max_model_points = 500,
                       std::map<std::string, std::string> paths = {})
      : max_points_(max_model_points), paths_(std::move(paths)) {}

  const TriangleMesh& mesh(const std::string& object_id) {
    auto it = meshes_.find(object_id);
    if (it == meshes_.end()) {
      const auto path = paths_.find(object_id);
      TriangleMesh m = path != paths_.end() ? load_mesh_with_metadata(path->second)
                                            : load_object(object_id);
      it = meshes_.emplace(object_id, std::move(m)).first;
      points_.emplace(object_id, model_points(it->second, max_points_));
    }
    return it->second;
  }

  const std::vector<Vec3>& points(const std::string& object_id) {
    mesh(object_id);
    return points_.at(object_id);
  }

 private:
  int max_points_;
  std::map<std::string, std::string> paths_;
  std::map<std::string, TriangleMesh> meshes_;
  std::map<std::string, std::vector<Vec3>> points_;
};

struct RefineRunConfig {
  std::string dataset_dir;
  std::string proposals_path;
  std::map<std::string, std::string> mesh_paths;  // object_id -> mesh file
  std::string critic = "oracle";                  // oracle | noisy | external
  std::string critic_command;                     // external only
  double critic_timeout_s = 10.0;
  NoisyCriticConfig noisy;
  RefinementConfig refinement;
  int render_resolution = 256;
  int out_resolution = 512;
  int max_model_points = 500;
  bool write_traces = false;
  int jobs = 1;
  std::string out_dir;
};

struct RefineEstimate {
  PoseRecord record;
  Pose initial_pose;
  int branch = 0;
  double final_objective = 0.0;
  std::vector<long> branch_eval_counts;
  double wall_ms = 0.0;
  std::string error;  // empty on success
  std::vector<RefinementTrace> traces;
};

struct RefineRunResult {
  std::vector<RefineEstimate> estimates;
  int n_failed = 0;
  double total_ms = 0.0;
  std::string config_hash;
};

inline json refine_config_to_json(const RefineRunConfig& cfg) {
  return {{"dataset", cfg.dataset_dir},
          {"proposals", cfg.proposals_path},
          {"critic", cfg.critic},
          {"critic_command", cfg.critic_command},
          {"noisy_critic", noisy_critic_config_to_json(cfg.noisy)},
          {"refinement", refinement_config_to_json(cfg.refinement)},
          {"render_resolution", cfg.render_resolution},
          {"out_resolution", cfg.out_resolution},
          {"max_model_points", cfg.max_model_points}};
}

// Refine every proposal against its frame: negative-depth correction,
// symmetry duplication when the model declares symmetries, then the
// 100-iteration loop per branch.
inline RefineRunResult run_refine(const RefineRunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  Dataset ds = load_dataset(cfg.dataset_dir);
  std::map<std::pair<int, std::string>, const GtEntry*> gt_by_key;
  for (const auto& e : ds.gt) gt_by_key[{e.record.frame_id, e.record.object_id}] = &e;

  // proposals may carry negative depth; rotation validity is still required
  std::vector<PoseRecord> proposals =
      pose_records_from_json(load_json_file(cfg.proposals_path));

  MeshLibrary library(cfg.max_model_points, cfg.mesh_paths);
  for (const auto& p : proposals) library.mesh(p.object_id);  // preload before threading

  const int jobs = std::max(1, cfg.jobs);
  std::vector<std::unique_ptr<Critic>> critics;
  for (int w = 0; w < jobs; ++w) {
    if (cfg.critic == "oracle") critics.push_back(std::make_unique<OracleCritic>());
    else if (cfg.critic == "noisy") critics.push_back(std::make_unique<NoisyCritic>(cfg.noisy));
    else if (cfg.critic == "external")
      critics.push_back(std::make_unique<ExternalCritic>(cfg.critic_command, cfg.out_resolution,
                                                         cfg.critic_timeout_s));
    else throw std::invalid_argument("unknown critic: " + cfg.critic);
  }
  RefineRunResult out;
  out.estimates.resize(proposals.size());

  auto process = [&](int i, int worker) {
    const PoseRecord& prop = proposals[i];
    RefineEstimate& est = out.estimates[i];
    est.record = prop;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto key = std::make_pair(prop.frame_id, prop.object_id);
      auto it = gt_by_key.find(key);
      if (it == gt_by_key.end())
        throw std::invalid_argument("no ground-truth entry for frame " +
                                    std::to_string(prop.frame_id) + ", object " + prop.object_id);
      const GtEntry& gt = *it->second;
      const TriangleMesh& mesh = library.mesh(prop.object_id);
      const std::vector<Vec3>& points = library.points(prop.object_id);
      const Image observed = load_image(ds.image_path(prop.frame_id));

      est.initial_pose = correct_negative_depth(prop.pose);
      Critic* critic = critics[worker].get();
      const bool oracle_family = cfg.critic == "oracle" || cfg.critic == "noisy";

      auto factory = [&]() {
        Objective obj;
        obj.observed_image = &observed;
        obj.mesh = &mesh;
        obj.intrinsics = ds.intrinsics;
        obj.critic = critic;
        obj.points = points;
        obj.pose_true = gt.record.pose;
        obj.has_ground_truth = oracle_family;
        obj.render_resolution = cfg.render_resolution;
        obj.out_resolution = cfg.out_resolution;
        obj.parallel_probes = false;
        return obj;
      };
      SymmetricRefineResult refined = refine_with_symmetries(
          factory, est.initial_pose, mesh.symmetries, cfg.refinement);
      est.record.pose = refined.best.final_pose;
      est.branch = refined.branch;
      est.final_objective = refined.best.final_objective;
      for (const auto& b : refined.branches) {
        est.branch_eval_counts.push_back(b.trace.eval_count);
        if (cfg.write_traces) est.traces.push_back(b.trace);
      }
    } catch (const std::exception& e) {
      est.error = e.what();
    }
    est.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  parallel_for(int(proposals.size()), jobs, process);

  out.config_hash = config_hash(refine_config_to_json(cfg));
  out.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  for (const auto& e : out.estimates) out.n_failed += e.error.empty() ? 0 : 1;

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    json estimates = json::array();
    json timing_entries = json::array();
    for (const auto& e : out.estimates) {
      json entry = {{"frame_id", e.record.frame_id}, {"object_id", e.record.object_id}};
      if (e.error.empty()) {
        entry["pose"] = pose_to_json(e.record.pose);
        entry["initial_pose"] = pose_to_json(e.initial_pose);
        entry["branch"] = e.branch;
        entry["final_objective"] = e.final_objective;
        entry["branch_eval_counts"] = e.branch_eval_counts;
      } else {
        entry["error"] = e.error;
      }
      estimates.push_back(entry);
      timing_entries.push_back({{"frame_id", e.record.frame_id},
                                {"object_id", e.record.object_id},
                                {"wall_ms", e.wall_ms}});
      if (cfg.write_traces && e.error.empty()) {
        for (const auto& trace : e.traces) {
          char name[96];
          std::snprintf(name, sizeof(name), "trace_%06d_%s_b%d.json", e.record.frame_id,
                        e.record.object_id.c_str(), trace.branch_id);
          write_json_file((fs::path(cfg.out_dir) / name).string(), trace_to_json(trace));
        }
      }
    }
    write_json_file((fs::path(cfg.out_dir) / "refined.json").string(),
                    json{{"estimates", estimates},
                         {"critic", cfg.critic},
                         {"config_hash", out.config_hash}});
    write_json_file((fs::path(cfg.out_dir) / "timing.json").string(),
                    json{{"total_ms", out.total_ms},
                         {"entries", timing_entries},
                         {"config_hash", out.config_hash}});
  }
  return out;
}

struct EvalRunConfig {
  std::string dataset_dir;
  std::string estimates_path;
  std::map<std::string, std::string> mesh_paths;
  int max_model_points = 500;
  std::string out_dir;
};

struct EvalRunResult {
  // metric name -> per-object recall table and mean
  std::vector<std::string> objects;
  std::map<std::string, std::map<std::string, double>> per_object;  // metric -> object -> recall
  std::map<std::string, double> mean;                               // metric -> mean recall
  std::vector<std::pair<PoseRecord, MetricVerdict>> instances;
  std::string config_hash;
  std::string table;  // aligned text table
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"add",    "add_s",  "reproj",
                                                 "reproj_s", "degcm", "degcm_s"};
  return names;
}

inline bool verdict_accepted(const MetricVerdict& v, const std::string& metric) {
  if (metric == "add") return v.add_ok;
  if (metric == "add_s") return v.adds_ok;
  if (metric == "reproj") return v.reproj_ok;
  if (metric == "reproj_s") return v.reproj_s_ok;
  if (metric == "degcm") return v.degcm_ok;
  if (metric == "degcm_s") return v.degcm_s_ok;
  throw std::invalid_argument("unknown metric: " + metric);
}

inline double verdict_value(const MetricVerdict& v, const std::string& metric) {
  if (metric == "add") return v.add_value;
  if (metric == "add_s") return v.adds_value;
  if (metric == "reproj") return v.reproj_value;
  if (metric == "reproj_s") return v.reproj_s_value;
  if (metric == "degcm") return v.rot_err;
  if (metric == "degcm_s") return v.rot_err_s;
  throw std::invalid_argument("unknown metric: " + metric);
}

// Per-object and mean recall of every metric over aligned (frame, object)
// keys. Key mismatches fail with an explicit diff.
inline EvalRunResult run_eval(const EvalRunConfig& cfg) {
  Dataset ds = load_dataset(cfg.dataset_dir);
  std::vector<PoseRecord> estimates =
      pose_records_from_json(load_json_file(cfg.estimates_path));

  std::map<std::pair<int, std::string>, const GtEntry*> gt_by_key;
  for (const auto& e : ds.gt) gt_by_key[{e.record.frame_id, e.record.object_id}] = &e;
  {
    std::vector<std::string> missing, extra;
    std::set<std::pair<int, std::string>> est_keys;
    for (const auto& e : estimates) {
      const auto key = std::make_pair(e.frame_id, e.object_id);
      est_keys.insert(key);
      if (!gt_by_key.count(key))
        extra.push_back(std::to_string(e.frame_id) + "/" + e.object_id);
    }
    for (const auto& [key, gt] : gt_by_key)
      if (!est_keys.count(key)) missing.push_back(std::to_string(key.first) + "/" + key.second);
    if (!missing.empty() || !extra.empty()) {
      std::ostringstream msg;
      msg << "estimate/ground-truth key mismatch:";
      if (!missing.empty()) {
        msg << " missing estimates for [";
        for (size_t i = 0; i < std::min<size_t>(missing.size(), 10); ++i)
          msg << (i ? ", " : "") << missing[i];
        if (missing.size() > 10) msg << ", ... (" << missing.size() << " total)";
        msg << "]";
      }
      if (!extra.empty()) {
        msg << " estimates without ground truth: [";
        for (size_t i = 0; i < std::min<size_t>(extra.size(), 10); ++i)
          msg << (i ? ", " : "") << extra[i];
        if (extra.size() > 10) msg << ", ... (" << extra.size() << " total)";
        msg << "]";
      }
      throw std::invalid_argument(msg.str());
    }
  }

  MeshLibrary library(cfg.max_model_points, cfg.mesh_paths);
  EvalRunResult out;
  std::map<std::string, std::vector<MetricVerdict>> by_object;
  for (const auto& est : estimates) {
    const GtEntry& gt = *gt_by_key.at({est.frame_id, est.object_id});
    const TriangleMesh& mesh = library.mesh(est.object_id);
    const MetricVerdict v =
        evaluate_instance(est.pose, gt.record.pose, library.points(est.object_id),
                          mesh.diameter, ds.intrinsics, symmetry_set_of(mesh));
    by_object[est.object_id].push_back(v);
    out.instances.push_back({est, v});
  }

  for (const auto& [obj, verdicts] : by_object) out.objects.push_back(obj);
  for (const auto& metric : metric_names()) {
    std::vector<double> recalls;
    for (const auto& obj : out.objects) {
      const double r = recall(by_object.at(obj),
                              [&](const MetricVerdict& v) { return verdict_accepted(v, metric); });
      out.per_object[metric][obj] = r;
      recalls.push_back(r);
    }
    out.mean[metric] = mean_recall(recalls);
  }

  out.config_hash = config_hash(json{{"dataset", cfg.dataset_dir},
                                     {"estimates", cfg.estimates_path},
                                     {"max_model_points", cfg.max_model_points}});

  {  // aligned text table
    std::ostringstream t;
    t << std::left;
    t.width(14);
    t << "object";
    for (const auto& m : metric_names()) {
      t.width(10);
      t << m;
    }
    t << "\n";
    auto row = [&](const std::string& name, const std::function<double(const std::string&)>& get) {
      t.width(14);
      t << name;
      for (const auto& m : metric_names()) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", get(m));
        t.width(10);
        t << buf;
      }
      t << "\n";
    };
    for (const auto& obj : out.objects)
      row(obj, [&](const std::string& m) { return out.per_object.at(m).at(obj); });
    row("mean", [&](const std::string& m) { return out.mean.at(m); });
    out.table = t.str();
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    std::ofstream csv(fs::path(cfg.out_dir) / "results.csv");
    csv << "object,metric,value,accepted\n";
    for (const auto& [rec, v] : out.instances)
      for (const auto& m : metric_names())
        csv << rec.object_id << "," << m << "," << verdict_value(v, m) << ","
            << (verdict_accepted(v, m) ? 1 : 0) << "\n";
    json per_object = json::object();
    for (const auto& m : metric_names())
      for (const auto& obj : out.objects) per_object[obj][m] = out.per_object.at(m).at(obj);
    json mean = json::object();
    for (const auto& m : metric_names()) mean[m] = out.mean.at(m);
    write_json_file((fs::path(cfg.out_dir) / "summary.json").string(),
                    json{{"per_object", per_object},
                         {"mean", mean},
                         {"n_instances", out.instances.size()},
                         {"config_hash", out.config_hash}});
    std::ofstream table(fs::path(cfg.out_dir) / "summary.txt");
    table << out.table;
  }
  return out;
}

struct SampleProposalsConfig {
  std::string dataset_dir;
  std::map<std::string, std::string> mesh_paths;
  ProposalSamplerConfig sampler;
  std::string out_path;
};

inline std::vector<PoseRecord> run_sample_proposals(const SampleProposalsConfig& cfg) {
  Dataset ds = load_dataset(cfg.dataset_dir);
  MeshLibrary library(500, cfg.mesh_paths);
  Rng rng(cfg.sampler.seed);
  std::vector<PoseRecord> out;
  for (const auto& gt : ds.gt) {
    PoseRecord r = gt.record;
    r.pose = sample_proposal(gt.record.pose, library.mesh(gt.record.object_id).diameter,
                             cfg.sampler, rng)
                 .pose;
    out.push_back(std::move(r));
  }
  if (!cfg.out_path.empty()) {
    json doc = {{"proposals", pose_records_to_json(out)},
                {"sampler", sampler_config_to_json(cfg.sampler)}};
    doc["config_hash"] = config_hash(doc);
    write_json_file(cfg.out_path, doc);
  }
  return out;
}

}  // namespace ppc

// Command-line front end: gen / sample-proposals / refine / eval / render /
// selftest. Exit codes: 0 success, 1 hard failure, 2 configuration error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "ppc/ppc.hpp"

namespace {

std::uint64_t resolve_seed(std::uint64_t config_seed) {
  // PPC_SEED overrides any configured seed.
  if (const char* env = std::getenv("PPC_SEED")) return std::strtoull(env, nullptr, 10);
  return config_seed;
}

std::map<std::string, std::string> parse_mesh_paths(const std::vector<std::string>& specs) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--mesh expects object_id=path, got: " + s);
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

int run_selftest() {
  using namespace ppc;
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    failures += ok ? 0 : 1;
  };

  const Mat3 r = so3_exp(Vec3(0.3, -0.2, 0.5));
  check("so3 exponential is orthonormal", is_valid_rotation(r));
  check("so3 inverse composes to identity",
        ((r * so3_exp(Vec3(-0.3, 0.2, -0.5))) - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  const TriangleMesh cube = shapes::make_builtin("cube");
  check("cube diameter", std::abs(cube.diameter - 0.1 * std::sqrt(3.0)) < 1e-12);

  CameraIntrinsics intr{500, 500, 320, 240, 640, 480};
  Pose pose;
  pose.translation = Vec3(0, 0, 0.8);
  const ZoomedCamera zoom = make_zoom(intr, pose, cube.diameter, 128);
  const RenderOutput a = render(cube, pose, zoom, ShadingParams{}, 64);
  const RenderOutput b = render(cube, pose, zoom, ShadingParams{}, 64);
  check("render determinism", a.color.pixels.data == b.color.pixels.data);
  check("render produces foreground",
        std::count(a.mask.begin(), a.mask.end(), std::uint8_t(1)) > 0);

  const std::vector<Vec3> pts = model_points(cube, 500);
  check("oracle zero at ground truth", oracle_error(pose, pose, pts, zoom) == 0.0);

  const Pose bad{Mat3::Identity(), Vec3(0.1, 0.2, -1.0)};
  const Pose fixed = correct_negative_depth(bad);
  check("negative depth correction", fixed.depth() > 0.0);

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"render-and-compare 6-DoF pose refinement toolkit"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with ground truth");
  std::string gen_out, gen_manifest, gen_bg_dir;
  std::vector<std::string> gen_objects = {"box", "bracket", "blob"};
  int gen_frames = 20;
  std::uint64_t gen_seed = 0;
  double gen_occluder_p = 0.5;
  bool gen_hsv = false;
  double gen_fx = 572.4, gen_fy = 573.6;
  int gen_width = 640, gen_height = 480;
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--objects", gen_objects, "builtin names or mesh paths");
  gen->add_option("--frames", gen_frames, "number of frames");
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--occluder-probability", gen_occluder_p, "probability of rendering occluders");
  gen->add_flag("--hsv-noise", gen_hsv, "apply HSV noise (synthetic-only training mode)");
  gen->add_option("--background-dir", gen_bg_dir, "background image directory (default: builtin)");
  gen->add_option("--fx", gen_fx, "focal length x");
  gen->add_option("--fy", gen_fy, "focal length y");
  gen->add_option("--width", gen_width, "image width");
  gen->add_option("--height", gen_height, "image height");
  gen->add_option("--from-manifest", gen_manifest, "regenerate from an existing manifest.json");

  // --- sample-proposals ---
  auto* sp = app.add_subcommand("sample-proposals", "perturb ground-truth poses into proposals");
  std::string sp_dataset, sp_out, sp_config;
  std::uint64_t sp_seed = 0;
  std::vector<std::string> sp_meshes;
  sp->add_option("--dataset", sp_dataset, "dataset directory")->required();
  sp->add_option("--out", sp_out, "output proposals JSON")->required();
  sp->add_option("--config", sp_config, "sampler config JSON");
  sp->add_option("--seed", sp_seed, "sampler seed");
  sp->add_option("--mesh", sp_meshes, "object_id=path mesh overrides");

  // --- refine ---
  auto* refine = app.add_subcommand("refine", "refine pose proposals against a dataset");
  std::string rf_dataset, rf_proposals, rf_out, rf_critic = "oracle", rf_critic_cmd, rf_config,
              rf_noisy_config;
  std::vector<std::string> rf_meshes;
  int rf_jobs = 1, rf_render_res = 256, rf_out_res = 512, rf_max_points = 500;
  std::uint64_t rf_seed = 0;
  bool rf_trace = false;
  refine->add_option("--dataset", rf_dataset, "dataset directory")->required();
  refine->add_option("--proposals", rf_proposals, "proposals JSON")->required();
  refine->add_option("--out", rf_out, "output directory")->required();
  refine->add_option("--critic", rf_critic, "oracle | noisy | external");
  refine->add_option("--critic-cmd", rf_critic_cmd, "external critic command line");
  refine->add_option("--config", rf_config, "refinement config JSON");
  refine->add_option("--noisy-config", rf_noisy_config, "noisy critic config JSON");
  refine->add_option("--jobs", rf_jobs, "worker pool size");
  refine->add_option("--render-resolution", rf_render_res, "raster resolution");
  refine->add_option("--patch-resolution", rf_out_res, "patch resolution");
  refine->add_option("--max-model-points", rf_max_points, "model point cap");
  refine->add_option("--seed", rf_seed, "noisy critic seed");
  refine->add_flag("--trace", rf_trace, "write per-branch trace files");
  refine->add_option("--mesh", rf_meshes, "object_id=path mesh overrides");

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "evaluate pose estimates against ground truth");
  std::string ev_dataset, ev_estimates, ev_out;
  std::vector<std::string> ev_meshes;
  int ev_max_points = 500;
  eval->add_option("--dataset", ev_dataset, "dataset directory")->required();
  eval->add_option("--estimates", ev_estimates, "estimates or proposals JSON")->required();
  eval->add_option("--out", ev_out, "output directory");
  eval->add_option("--max-model-points", ev_max_points, "model point cap");
  eval->add_option("--mesh", ev_meshes, "object_id=path mesh overrides");

  // --- render ---
  auto* render_cmd = app.add_subcommand("render", "render an object patch under a pose");
  std::string rd_object = "box", rd_pose_file, rd_dataset, rd_out = "render";
  int rd_frame = 0, rd_render_res = 256, rd_out_res = 512;
  bool rd_mask = false, rd_depth = false;
  render_cmd->add_option("--object", rd_object, "builtin name or mesh path");
  render_cmd->add_option("--pose", rd_pose_file, "pose JSON file ({R,t})");
  render_cmd->add_option("--dataset", rd_dataset, "take pose from a dataset frame");
  render_cmd->add_option("--frame", rd_frame, "frame id within --dataset");
  render_cmd->add_option("--out", rd_out, "output file prefix");
  render_cmd->add_option("--render-resolution", rd_render_res, "raster resolution");
  render_cmd->add_option("--patch-resolution", rd_out_res, "patch resolution");
  render_cmd->add_flag("--dump-mask", rd_mask, "also write the foreground mask PNG");
  render_cmd->add_flag("--dump-depth", rd_depth, "also write 16-bit millimeter depth PNG");

  auto* selftest = app.add_subcommand("selftest", "quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      ppc::DatasetSpec spec;
      if (!gen_manifest.empty()) {
        spec = ppc::dataset_spec_from_manifest(gen_manifest);
      } else {
        spec.object_names = gen_objects;
        spec.n_frames = gen_frames;
        spec.intrinsics = {gen_fx, gen_fy, gen_width / 2.0, gen_height / 2.0, gen_width,
                           gen_height};
        spec.config.seed = resolve_seed(gen_seed);
        spec.config.occluder_probability = gen_occluder_p;
        spec.config.hsv_noise = gen_hsv;
        spec.config.background_dir = gen_bg_dir;
      }
      ppc::generate_dataset(spec, gen_out);
      std::cout << "wrote " << spec.n_frames << " frames to " << gen_out << "\n";
      return 0;
    }

    if (sp->parsed()) {
      ppc::SampleProposalsConfig cfg;
      cfg.dataset_dir = sp_dataset;
      cfg.out_path = sp_out;
      cfg.mesh_paths = parse_mesh_paths(sp_meshes);
      if (!sp_config.empty())
        cfg.sampler = ppc::sampler_config_from_json(ppc::load_json_file(sp_config));
      if (sp->count("--seed")) cfg.sampler.seed = sp_seed;
      cfg.sampler.seed = resolve_seed(cfg.sampler.seed);
      const auto proposals = ppc::run_sample_proposals(cfg);
      std::cout << "wrote " << proposals.size() << " proposals to " << sp_out << "\n";
      return 0;
    }

    if (refine->parsed()) {
      ppc::RefineRunConfig cfg;
      cfg.dataset_dir = rf_dataset;
      cfg.proposals_path = rf_proposals;
      cfg.out_dir = rf_out;
      cfg.critic = rf_critic;
      cfg.critic_command = rf_critic_cmd;
      cfg.mesh_paths = parse_mesh_paths(rf_meshes);
      cfg.jobs = rf_jobs;
      cfg.render_resolution = rf_render_res;
      cfg.out_resolution = rf_out_res;
      cfg.max_model_points = rf_max_points;
      cfg.write_traces = rf_trace;
      if (!rf_config.empty())
        cfg.refinement = ppc::refinement_config_from_json(ppc::load_json_file(rf_config));
      if (!rf_noisy_config.empty())
        cfg.noisy = ppc::noisy_critic_config_from_json(ppc::load_json_file(rf_noisy_config));
      cfg.noisy.seed = resolve_seed(rf_seed ? rf_seed : cfg.noisy.seed);
      if (cfg.critic == "external" && cfg.critic_command.empty())
        throw std::invalid_argument("--critic external requires --critic-cmd");
      const ppc::RefineRunResult result = ppc::run_refine(cfg);
      std::cout << "refined " << result.estimates.size() - result.n_failed << "/"
                << result.estimates.size() << " proposals in " << result.total_ms / 1000.0
                << " s\n";
      for (const auto& e : result.estimates)
        if (!e.error.empty())
          std::cerr << "frame " << e.record.frame_id << " " << e.record.object_id << ": "
                    << e.error << "\n";
      return result.n_failed == 0 ? 0 : 1;
    }

    if (eval->parsed()) {
      ppc::EvalRunConfig cfg;
      cfg.dataset_dir = ev_dataset;
      cfg.estimates_path = ev_estimates;
      cfg.out_dir = ev_out;
      cfg.max_model_points = ev_max_points;
      cfg.mesh_paths = parse_mesh_paths(ev_meshes);
      const ppc::EvalRunResult result = ppc::run_eval(cfg);
      std::cout << result.table;
      return 0;
    }

    if (render_cmd->parsed()) {
      const ppc::TriangleMesh mesh = ppc::load_object(rd_object);
      ppc::CameraIntrinsics intr{572.4, 573.6, 320, 240, 640, 480};
      ppc::Pose pose;
      pose.translation = ppc::Vec3(0, 0, 0.8);
      if (!rd_dataset.empty()) {
        const ppc::Dataset ds = ppc::load_dataset(rd_dataset);
        intr = ds.intrinsics;
        bool found = false;
        for (const auto& e : ds.gt)
          if (e.record.frame_id == rd_frame) {
            pose = e.record.pose;
            found = true;
            break;
          }
        if (!found)
          throw std::invalid_argument("frame " + std::to_string(rd_frame) + " not in dataset");
      } else if (!rd_pose_file.empty()) {
        pose = ppc::pose_from_json(ppc::load_json_file(rd_pose_file));
      }
      const ppc::ZoomedCamera zoom = ppc::make_zoom(intr, pose, mesh.diameter, rd_out_res);
      const ppc::RenderOutput out = ppc::render(mesh, pose, zoom, ppc::ShadingParams{},
                                                rd_render_res);
      ppc::write_binary_file(rd_out + "_color.png", ppc::encode_png(out.color.pixels));
      if (rd_mask)
        ppc::write_binary_file(rd_out + "_mask.png",
                               ppc::encode_mask_png(out.mask, rd_out_res, rd_out_res));
      if (rd_depth)
        ppc::write_binary_file(rd_out + "_depth.png",
                               ppc::encode_depth_png(out.depth, rd_out_res, rd_out_res));
      std::cout << "wrote " << rd_out << "_color.png\n";
      return 0;
    }

    if (selftest->parsed()) return run_selftest();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ppc::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

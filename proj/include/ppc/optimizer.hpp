#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "ppc/objective.hpp"

namespace ppc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double base_step = 1e-3;
};

// Standard bias-corrected Adam over a small fixed-size parameter block.
template <int N>
struct AdamState {
  AdamConfig cfg;
  Eigen::Matrix<double, N, 1> m = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, 1> v = Eigen::Matrix<double, N, 1>::Zero();
  long t = 0;

  Eigen::Matrix<double, N, 1> step(const Eigen::Matrix<double, N, 1>& grad, double multiplier) {
    ++t;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const Eigen::Matrix<double, N, 1> m_hat = m / (1.0 - std::pow(cfg.beta1, double(t)));
    const Eigen::Matrix<double, N, 1> v_hat = v / (1.0 - std::pow(cfg.beta2, double(t)));
    return (-cfg.base_step * multiplier) *
           (m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon)).matrix();
  }
};

template <int N>
struct SgdMomentumState {
  double momentum = 0.5;
  double base_step = 1.0;
  Eigen::Matrix<double, N, 1> velocity = Eigen::Matrix<double, N, 1>::Zero();

  Eigen::Matrix<double, N, 1> step(const Eigen::Matrix<double, N, 1>& grad, double multiplier) {
    velocity = momentum * velocity + grad;
    return -base_step * multiplier * velocity;
  }
};

// Piecewise-linear step-size multiplier over the iteration index.
struct Schedule {
  std::vector<std::pair<double, double>> breakpoints;  // (iteration, multiplier), sorted

  double value(double it) const {
    if (breakpoints.empty()) return 1.0;
    if (it <= breakpoints.front().first) return breakpoints.front().second;
    if (it >= breakpoints.back().first) return breakpoints.back().second;
    for (size_t i = 1; i < breakpoints.size(); ++i) {
      if (it <= breakpoints[i].first) {
        const auto& [x0, y0] = breakpoints[i - 1];
        const auto& [x1, y1] = breakpoints[i];
        return x1 == x0 ? y1 : y0 + (y1 - y0) * (it - x0) / (x1 - x0);
      }
    }
    return breakpoints.back().second;
  }

  static Schedule constant(double v) { return Schedule{{{0.0, v}}}; }
};

// Rotation: full step for the first 40 % of the run, then exponential decay
// to 0.05 at the last iteration (sampled per iteration so the piecewise
// -linear form is exact where the loop reads it).
inline Schedule default_rotation_schedule(int iterations = 100) {
  Schedule s;
  const int knee = int(std::round(0.4 * iterations)) - 1;
  const int last = iterations - 1;
  s.breakpoints.push_back({0.0, 1.0});
  s.breakpoints.push_back({double(knee), 1.0});
  for (int i = knee + 1; i <= last; ++i)
    s.breakpoints.push_back({double(i), std::exp(std::log(0.05) * double(i - knee) / double(last - knee))});
  return s;
}

// Depth: held low while rotation settles, ramped to full, then eased back.
inline Schedule default_depth_schedule(int iterations = 100) {
  const double n = iterations / 100.0;
  Schedule s;
  s.breakpoints = {{0.0, 0.05},
                   {std::round(34 * n), 0.05},
                   {std::round(59 * n), 1.0},
                   {std::round(84 * n), 1.0},
                   {double(iterations - 1), 0.3}};
  return s;
}

inline Schedule default_lateral_schedule(int /*iterations*/ = 100) { return Schedule::constant(1.0); }

struct RefinementConfig {
  int iterations = 100;
  FiniteDiffSteps fd;
  AdamConfig adam_rot{0.6, 0.9, 1e-8, 0.04};
  AdamConfig adam_depth{0.4, 0.9, 1e-8, 0.01};
  double sgd_momentum = 0.5;
  double sgd_lat_step = 1.0;
  Schedule sched_rot = default_rotation_schedule(100);
  Schedule sched_lat = default_lateral_schedule(100);
  Schedule sched_depth = default_depth_schedule(100);
  // "iterate with the least estimated error": compare symmetry branches at
  // their final iterates (default) or at the best recorded trace entry.
  bool select_best_over_trace = false;
};

struct TraceEntry {
  PoseDelta delta;
  double objective = 0.0;  // probe mean per iteration; exact J for the final entry
  double mult_rot = 0.0, mult_lat = 0.0, mult_depth = 0.0;
};

struct RefinementTrace {
  std::vector<TraceEntry> entries;  // iterations + 1, includes the initial point
  int branch_id = 0;
  Pose final_pose;
  double final_objective = 0.0;
  long eval_count = 0;
};

struct RefineResult {
  Pose final_pose;
  double final_objective = 0.0;
  RefinementTrace trace;
};

struct RefinementError : std::runtime_error {
  RefinementError(const std::string& msg, RefinementTrace trace)
      : std::runtime_error(msg), partial_trace(std::move(trace)) {}
  RefinementTrace partial_trace;
};

// The decoupled refinement loop: one numeric gradient per iteration, then
// simultaneous updates of the three parameter blocks, each scaled by its own
// schedule. Adam drives rotation and depth, SGD with momentum the lateral
// offset.
inline RefineResult refine(Objective& obj, const Pose& proposal, const RefinementConfig& cfg) {
  if (!(proposal.depth() > 0.0))
    throw BehindCameraError("refine: proposal has non-positive depth (correct it upstream)");
  obj.frame = make_reference_frame(obj.intrinsics, proposal, obj.mesh->diameter,
                                   obj.out_resolution);
  AdamState<3> adam_rot{cfg.adam_rot};
  AdamState<1> adam_depth{cfg.adam_depth};
  SgdMomentumState<2> sgd_lat{cfg.sgd_momentum, cfg.sgd_lat_step};

  PoseDelta delta;
  RefinementTrace trace;
  trace.entries.reserve(cfg.iterations + 1);
  try {
    for (int it = 0; it < cfg.iterations; ++it) {
      std::array<double, 12> probes{};
      const Vec6 grad = numeric_gradient(obj, delta, cfg.fd, &probes);
      const double mult_rot = cfg.sched_rot.value(it);
      const double mult_lat = cfg.sched_lat.value(it);
      const double mult_depth = cfg.sched_depth.value(it);

      TraceEntry entry;
      entry.delta = delta;
      entry.objective = std::accumulate(probes.begin(), probes.end(), 0.0) / 12.0;
      entry.mult_rot = mult_rot;
      entry.mult_lat = mult_lat;
      entry.mult_depth = mult_depth;
      trace.entries.push_back(entry);

      delta.theta_r += adam_rot.step(Vec3(grad[0], grad[1], grad[2]), mult_rot);
      delta.theta_l += sgd_lat.step(Vec2(grad[3], grad[4]), mult_lat);
      Eigen::Matrix<double, 1, 1> gd;
      gd << grad[5];
      delta.theta_d += adam_depth.step(gd, mult_depth)[0];
    }

    TraceEntry final_entry;
    final_entry.delta = delta;
    final_entry.objective = evaluate(obj, delta);
    const double last = std::max(0, cfg.iterations - 1);
    final_entry.mult_rot = cfg.sched_rot.value(last);
    final_entry.mult_lat = cfg.sched_lat.value(last);
    final_entry.mult_depth = cfg.sched_depth.value(last);
    trace.entries.push_back(final_entry);
  } catch (const RefinementError&) {
    throw;
  } catch (const std::exception& e) {
    trace.eval_count = obj.eval_count;
    throw RefinementError(std::string("refinement aborted: ") + e.what(), std::move(trace));
  }

  RefineResult result;
  result.final_pose = apply_delta(obj.frame, delta);
  result.final_objective = trace.entries.back().objective;
  trace.final_pose = result.final_pose;
  trace.final_objective = result.final_objective;
  trace.eval_count = obj.eval_count;
  result.trace = std::move(trace);
  return result;
}

struct SymmetricRefineResult {
  RefineResult best;
  int branch = 0;
  std::vector<RefineResult> branches;
};

// Duplicate the proposal with each declared symmetry rotation (object frame),
// refine every branch, and keep the iterate with the least estimated error.
inline SymmetricRefineResult refine_with_symmetries(
    const std::function<Objective()>& objective_factory, const Pose& proposal,
    const std::vector<Mat3>& symmetries, const RefinementConfig& cfg) {
  require(!symmetries.empty(), "refine_with_symmetries: symmetry list must include the identity");
  SymmetricRefineResult out;
  bool have_error = false;
  std::exception_ptr first_error;
  for (int b = 0; b < int(symmetries.size()); ++b) {
    Pose branch_proposal = proposal;
    branch_proposal.rotation = proposal.rotation * symmetries[b];
    try {
      Objective obj = objective_factory();
      RefineResult r = refine(obj, branch_proposal, cfg);
      r.trace.branch_id = b;
      out.branches.push_back(std::move(r));
    } catch (...) {
      if (!have_error) {
        first_error = std::current_exception();
        have_error = true;
      }
    }
  }
  if (out.branches.empty()) std::rethrow_exception(first_error);

  auto branch_score = [&](const RefineResult& r) {
    if (!cfg.select_best_over_trace) return r.final_objective;
    double best = r.final_objective;
    for (const auto& e : r.trace.entries) best = std::min(best, e.objective);
    return best;
  };
  int best_idx = 0;
  for (int i = 1; i < int(out.branches.size()); ++i)
    if (branch_score(out.branches[i]) < branch_score(out.branches[best_idx])) best_idx = i;
  out.best = out.branches[best_idx];
  out.branch = out.branches[best_idx].trace.branch_id;
  return out;
}

}  // namespace ppc

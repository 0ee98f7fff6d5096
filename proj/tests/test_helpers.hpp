#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "ppc/camera.hpp"
#include "ppc/geometry.hpp"
#include "ppc/random.hpp"

namespace test {

// Scratch directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("ppc_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline ppc::CameraIntrinsics default_intrinsics() {
  return {500.0, 500.0, 320.0, 240.0, 640, 480};
}

inline ppc::Pose pose_at(double x, double y, double z, const ppc::Vec3& axis_angle = ppc::Vec3::Zero()) {
  ppc::Pose pose;
  pose.rotation = ppc::so3_exp(axis_angle);
  pose.translation = ppc::Vec3(x, y, z);
  return pose;
}

inline ppc::Pose random_pose(ppc::Rng& rng, double depth_lo = 0.5, double depth_hi = 1.5) {
  ppc::Pose pose;
  pose.rotation = ppc::so3_exp(ppc::Vec3(rng.normal(), rng.normal(), rng.normal()));
  pose.translation = ppc::Vec3(rng.uniform(-0.15, 0.15), rng.uniform(-0.1, 0.1),
                               rng.uniform(depth_lo, depth_hi));
  return pose;
}

}  // namespace test

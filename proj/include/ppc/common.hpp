#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace ppc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Thrown when a point or object center ends up at z <= 0 in the camera frame.
struct BehindCameraError : std::runtime_error {
  explicit BehindCameraError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mesh/image/config file could not be parsed.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// External critic subprocess misbehaved (handshake, malformed line, timeout,
// negative or non-finite response).
struct CriticProtocolError : std::runtime_error {
  explicit CriticProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

// Pose with depth exactly zero cannot be corrected or projected.
struct DegeneratePoseError : std::runtime_error {
  explicit DegeneratePoseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Synthetic frame generation could not satisfy the visibility constraint.
struct DatagenError : std::runtime_error {
  explicit DatagenError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace ppc

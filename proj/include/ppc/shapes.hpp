#pragma once

#include <cmath>
#include <map>
#include <string>

#include "ppc/mesh.hpp"

namespace ppc {
namespace shapes {

namespace detail {

// Mild deterministic per-vertex albedo variation around a base color.
inline void tint(TriangleMesh& mesh, const Vec3& base) {
  mesh.albedo.resize(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& p = mesh.vertices[i];
    const double m = 0.85 + 0.15 * std::sin(37.0 * p.x() + 53.0 * p.y() + 71.0 * p.z());
    mesh.albedo[i] = (base * m).cwiseMin(1.0).cwiseMax(0.0);
  }
}

inline void append(TriangleMesh& dst, const TriangleMesh& src, const Mat3& r, const Vec3& t) {
  const int base = int(dst.vertices.size());
  for (size_t i = 0; i < src.vertices.size(); ++i) {
    dst.vertices.push_back(r * src.vertices[i] + t);
    dst.normals.push_back(r * src.normals[i]);
  }
  for (const auto& tri : src.triangles)
    dst.triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
}

}  // namespace detail

// Axis-aligned box centered at the origin, each face an n x n grid with
// per-face normals (vertices duplicated across faces).
inline TriangleMesh make_box(double sx, double sy, double sz, int n = 3) {
  TriangleMesh mesh;
  const Vec3 half(sx / 2, sy / 2, sz / 2);
  // face axes: (normal axis, sign)
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const int base = int(mesh.vertices.size());
      Vec3 normal = Vec3::Zero();
      normal[axis] = sign;
      for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
          Vec3 p;
          p[axis] = sign * half[axis];
          p[u] = (-1.0 + 2.0 * i / n) * half[u];
          p[v] = (-1.0 + 2.0 * j / n) * half[v];
          mesh.vertices.push_back(p);
          mesh.normals.push_back(normal);
        }
      }
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const int a = base + j * (n + 1) + i;
          const int b = a + 1;
          const int c = a + (n + 1);
          const int d = c + 1;
          if (sign > 0) {
            mesh.triangles.push_back({a, b, d});
            mesh.triangles.push_back({a, d, c});
          } else {
            mesh.triangles.push_back({a, d, b});
            mesh.triangles.push_back({a, c, d});
          }
        }
      }
    }
  }
  detail::tint(mesh, Vec3(0.8, 0.3, 0.25));
  mesh.diameter = compute_diameter(mesh.vertices);
  mesh.symmetries.push_back(Mat3::Identity());
  return mesh;
}

// Icosphere scaled anisotropically; an asymmetric blob when radii differ.
inline TriangleMesh make_blob(double rx, double ry, double rz, int subdivisions = 2) {
  TriangleMesh mesh;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
      {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2},
      {3, 2, 6}, {3, 6, 8}, {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10},
      {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      const int idx = int(verts.size()) - 1;
      midpoints[key] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  const Vec3 radii(rx, ry, rz);
  for (const Vec3& v : verts) {
    mesh.vertices.push_back(v.cwiseProduct(radii));
    // exact ellipsoid normal: v scaled by inverse radii
    mesh.normals.push_back(Vec3(v.x() / rx, v.y() / ry, v.z() / rz).normalized());
  }
  mesh.triangles = faces;
  detail::tint(mesh, Vec3(0.3, 0.55, 0.8));
  mesh.diameter = compute_diameter(mesh.vertices);
  mesh.symmetries.push_back(Mat3::Identity());
  return mesh;
}

// L-shaped bracket: two boxes joined at a corner. Clearly asymmetric.
inline TriangleMesh make_bracket() {
  TriangleMesh mesh;
  TriangleMesh arm1 = make_box(0.20, 0.06, 0.05, 3);
  TriangleMesh arm2 = make_box(0.06, 0.13, 0.05, 3);
  detail::append(mesh, arm1, Mat3::Identity(), Vec3(0.0, -0.035, 0.0));
  detail::append(mesh, arm2, Mat3::Identity(), Vec3(-0.07, 0.06, 0.0));
  detail::tint(mesh, Vec3(0.75, 0.65, 0.2));
  mesh.diameter = compute_diameter(mesh.vertices);
  mesh.symmetries.push_back(Mat3::Identity());
  return mesh;
}

// Two-lobe object that is exactly symmetric under a 180-degree rotation about
// its z axis; the symmetry is declared so symmetry-aware metrics can use it.
inline TriangleMesh make_twofold() {
  TriangleMesh mesh;
  TriangleMesh lobe = make_box(0.10, 0.05, 0.06, 3);
  TriangleMesh bar = make_box(0.22, 0.025, 0.025, 3);
  Mat3 flip;
  flip << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  detail::append(mesh, bar, Mat3::Identity(), Vec3::Zero());
  detail::append(mesh, lobe, Mat3::Identity(), Vec3(0.08, 0.03, 0.0));
  detail::append(mesh, lobe, flip, Vec3(-0.08, -0.03, 0.0));
  detail::tint(mesh, Vec3(0.4, 0.75, 0.4));
  mesh.diameter = compute_diameter(mesh.vertices);
  mesh.symmetries.push_back(Mat3::Identity());
  mesh.symmetries.push_back(flip);
  return mesh;
}

// Builtin lookup used by the CLI and the synthetic-data generator.
inline TriangleMesh make_builtin(const std::string& name) {
  if (name == "box") return make_box(0.12, 0.18, 0.25, 3);
  if (name == "bracket") return make_bracket();
  if (name == "blob") return make_blob(0.07, 0.09, 0.12, 2);
  if (name == "twofold") return make_twofold();
  if (name == "cube") return make_box(0.1, 0.1, 0.1, 2);
  throw std::invalid_argument("unknown builtin mesh: " + name +
                              " (available: box, bracket, blob, twofold, cube)");
}

}  // namespace shapes
}  // namespace ppc

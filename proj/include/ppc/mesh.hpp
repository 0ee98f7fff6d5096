#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ppc/common.hpp"
#include "ppc/random.hpp"

namespace ppc {

struct TriangleMesh {
  std::vector<Vec3> vertices;                 // object frame, meters
  std::vector<std::array<int, 3>> triangles;  // vertex indices
  std::vector<Vec3> normals;                  // per-vertex, unit length
  std::vector<Vec3> albedo;                   // per-vertex RGB in [0,1]
  double diameter = 0.0;                      // max pairwise vertex distance
  std::vector<Mat3> symmetries;               // object-frame rotations, identity first
};

namespace detail {

inline void compute_vertex_normals(TriangleMesh& mesh) {
  mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& tri : mesh.triangles) {
    const Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
    const Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
    const Vec3 n = e1.cross(e2);  // magnitude = 2x area, giving area weighting
    for (int k = 0; k < 3; ++k) mesh.normals[tri[k]] += n;
  }
  for (auto& n : mesh.normals) {
    const double len = n.norm();
    n = len > 1e-20 ? Vec3(n / len) : Vec3(0, 0, 1);
  }
}

inline void normalize_normals(TriangleMesh& mesh) {
  for (auto& n : mesh.normals) {
    const double len = n.norm();
    n = len > 1e-20 ? Vec3(n / len) : Vec3(0, 0, 1);
  }
}

}  // namespace detail

// Deterministic subsample of the vertex set, used for Eq.-style point loops
// and metrics. Returns all vertices when they fit.
inline std::vector<Vec3> model_points(const TriangleMesh& mesh, int max_points = 2000) {
  require(max_points >= 4, "model_points: max_points must be >= 4");
  if (int(mesh.vertices.size()) <= max_points) return mesh.vertices;
  // Partial Fisher-Yates with a seed derived from the sizes only, so the same
  // call always selects the same subset.
  std::vector<int> idx(mesh.vertices.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(hash_combine(0x9d0c6f2au, hash_combine(mesh.vertices.size(), max_points)));
  for (int i = 0; i < max_points; ++i) {
    const auto j = i + rng.uniform_index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_points);
  std::sort(idx.begin(), idx.end());
  std::vector<Vec3> out;
  out.reserve(max_points);
  for (int i : idx) out.push_back(mesh.vertices[i]);
  return out;
}

// Max pairwise distance. Exact up to 5000 vertices, otherwise over a
// deterministic 5000-point subsample (may underestimate by a small margin).
inline double compute_diameter(const std::vector<Vec3>& vertices) {
  const std::vector<Vec3>* pts = &vertices;
  std::vector<Vec3> sub;
  if (vertices.size() > 5000) {
    TriangleMesh tmp;
    tmp.vertices = vertices;
    sub = model_points(tmp, 5000);
    pts = &sub;
  }
  double best = 0.0;
  for (size_t i = 0; i < pts->size(); ++i)
    for (size_t j = i + 1; j < pts->size(); ++j)
      best = std::max(best, ((*pts)[i] - (*pts)[j]).squaredNorm());
  return std::sqrt(best);
}

inline void finalize_mesh(TriangleMesh& mesh, bool keep_normals) {
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw ParseError("mesh has no vertices or no faces");
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= int(mesh.vertices.size()))
        throw ParseError("mesh face index out of range");
  if (keep_normals && mesh.normals.size() == mesh.vertices.size())
    detail::normalize_normals(mesh);
  else
    detail::compute_vertex_normals(mesh);
  if (mesh.albedo.size() != mesh.vertices.size())
    mesh.albedo.assign(mesh.vertices.size(), Vec3(0.7, 0.7, 0.7));
  mesh.diameter = compute_diameter(mesh.vertices);
  if (mesh.symmetries.empty()) mesh.symmetries.push_back(Mat3::Identity());
}

namespace detail {

inline TriangleMesh load_obj(std::istream& in) {
  TriangleMesh mesh;
  std::vector<Vec3> normals_pool;
  std::vector<int> vertex_normal_idx;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw ParseError("OBJ line " + std::to_string(line_no) + ": bad vertex");
      mesh.vertices.emplace_back(x, y, z);
      double r, g, b;  // some exporters append per-vertex color
      if (ls >> r >> g >> b) {
        mesh.albedo.resize(mesh.vertices.size(), Vec3(0.7, 0.7, 0.7));
        mesh.albedo.back() = Vec3(r, g, b);
      }
      vertex_normal_idx.push_back(-1);
    } else if (tag == "vn") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw ParseError("OBJ line " + std::to_string(line_no) + ": bad normal");
      normals_pool.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> vi;
      std::string corner;
      while (ls >> corner) {
        // v, v/t, v//n, v/t/n
        int v = 0, n = -1;
        const size_t s1 = corner.find('/');
        try {
          v = std::stoi(corner.substr(0, s1));
          if (s1 != std::string::npos) {
            const size_t s2 = corner.find('/', s1 + 1);
            if (s2 != std::string::npos && s2 + 1 < corner.size())
              n = std::stoi(corner.substr(s2 + 1));
          }
        } catch (const std::exception&) {
          throw ParseError("OBJ line " + std::to_string(line_no) + ": bad face corner '" +
                           corner + "'");
        }
        if (v < 0) v = int(mesh.vertices.size()) + v + 1;
        if (v < 1 || v > int(mesh.vertices.size()))
          throw ParseError("OBJ line " + std::to_string(line_no) + ": vertex index out of range");
        if (n > 0 && n <= int(normals_pool.size())) vertex_normal_idx[v - 1] = n - 1;
        vi.push_back(v - 1);
      }
      if (vi.size() < 3)
        throw ParseError("OBJ line " + std::to_string(line_no) + ": face with fewer than 3 corners");
      for (size_t k = 2; k < vi.size(); ++k)
        mesh.triangles.push_back({vi[0], int(vi[k - 1]), int(vi[k])});
    }
  }
  if (mesh.albedo.size() > 0) mesh.albedo.resize(mesh.vertices.size(), Vec3(0.7, 0.7, 0.7));
  bool have_normals = !normals_pool.empty();
  if (have_normals) {
    mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      if (vertex_normal_idx[i] < 0) { have_normals = false; break; }
      mesh.normals[i] = normals_pool[vertex_normal_idx[i]];
    }
    if (!have_normals) mesh.normals.clear();
  }
  finalize_mesh(mesh, have_normals);
  return mesh;
}

inline TriangleMesh load_ply(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError("PLY: unexpected end of header");
    ++line_no;
    return line;
  };
  if (next_line() != "ply") throw ParseError("PLY line 1: missing magic");

  size_t n_vertices = 0, n_faces = 0;
  std::vector<std::string> vertex_props;
  std::string current_element;
  while (true) {
    std::istringstream ls(next_line());
    std::string tag;
    ls >> tag;
    if (tag == "end_header") break;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw ParseError("PLY line " + std::to_string(line_no) +
                                           ": only ascii format is supported");
    } else if (tag == "element") {
      std::string name;
      size_t count;
      ls >> name >> count;
      current_element = name;
      if (name == "vertex") n_vertices = count;
      else if (name == "face") n_faces = count;
    } else if (tag == "property" && current_element == "vertex") {
      std::string type, name;
      ls >> type;
      if (type == "list") { ls >> name >> name; }
      ls >> name;
      vertex_props.push_back(name);
    }
  }

  TriangleMesh mesh;
  const bool has_normals =
      std::count(vertex_props.begin(), vertex_props.end(), "nx") > 0;
  const bool has_color =
      std::count(vertex_props.begin(), vertex_props.end(), "red") > 0;
  mesh.vertices.reserve(n_vertices);
  for (size_t i = 0; i < n_vertices; ++i) {
    std::istringstream ls(next_line());
    double x = 0, y = 0, z = 0, nx = 0, ny = 0, nz = 1, r = 178, g = 178, b = 178;
    for (const auto& prop : vertex_props) {
      double v;
      if (!(ls >> v))
        throw ParseError("PLY line " + std::to_string(line_no) + ": short vertex row");
      if (prop == "x") x = v;
      else if (prop == "y") y = v;
      else if (prop == "z") z = v;
      else if (prop == "nx") nx = v;
      else if (prop == "ny") ny = v;
      else if (prop == "nz") nz = v;
      else if (prop == "red") r = v;
      else if (prop == "green") g = v;
      else if (prop == "blue") b = v;
    }
    mesh.vertices.emplace_back(x, y, z);
    if (has_normals) mesh.normals.emplace_back(nx, ny, nz);
    if (has_color) mesh.albedo.emplace_back(r / 255.0, g / 255.0, b / 255.0);
  }
  for (size_t i = 0; i < n_faces; ++i) {
    std::istringstream ls(next_line());
    int count;
    if (!(ls >> count) || count < 3)
      throw ParseError("PLY line " + std::to_string(line_no) + ": bad face row");
    std::vector<int> vi(count);
    for (int& v : vi)
      if (!(ls >> v)) throw ParseError("PLY line " + std::to_string(line_no) + ": short face row");
    for (int k = 2; k < count; ++k) mesh.triangles.push_back({vi[0], vi[k - 1], vi[k]});
  }
  finalize_mesh(mesh, has_normals);
  return mesh;
}

}  // namespace detail

// Load an ASCII OBJ or PLY mesh. Normals are taken from the file when fully
// present (re-normalized), otherwise computed area-weighted.
inline TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply") return detail::load_ply(in);
  return detail::load_obj(in);
}

}  // namespace ppc

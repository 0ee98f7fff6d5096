#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ppc/camera.hpp"
#include "ppc/mesh.hpp"

namespace ppc {

struct ShadingParams {
  enum class Mode { lambertian, phong };
  Mode mode = Mode::lambertian;
  Vec3 light_position = Vec3::Zero();  // camera frame; default = camera center
  double ambient = 0.3;
  double diffuse = 0.7;
  double specular = 0.0;
  double shininess = 16.0;
  double whiteness = 0.5;  // blend of albedo vs white in the specular color
};

struct RenderOutput {
  ImagePatch color;            // background exactly (0,0,0)
  std::vector<std::uint8_t> mask;  // out_resolution^2, foreground flags
  std::vector<float> depth;        // out_resolution^2, meters, +inf background
};

// Plain pinhole raster target; either a zoom window at some resolution or a
// full base camera.
struct PinholeView {
  double fx, fy, cx, cy;
  int width, height;
};

inline PinholeView view_from_zoom(const ZoomedCamera& zoom, int resolution) {
  const double k = resolution / zoom.patch_side;
  const Vec2 corner = zoom.corner();
  return {zoom.base.fx * k, zoom.base.fy * k, (zoom.base.cx - corner.x()) * k,
          (zoom.base.cy - corner.y()) * k, resolution, resolution};
}

inline PinholeView view_from_intrinsics(const CameraIntrinsics& intr) {
  return {intr.fx, intr.fy, intr.cx, intr.cy, intr.width, intr.height};
}

struct SceneObject {
  const TriangleMesh* mesh;
  Pose pose;
};

// Joint render of several objects: shaded color, per-pixel winning object
// index (-1 for background) and depth.
struct SceneRender {
  int width = 0, height = 0;
  Image color;
  std::vector<float> depth;        // +inf background
  std::vector<std::int32_t> winner;  // -1 background

  int count_winner(int object_index) const {
    int n = 0;
    for (const auto w : winner) n += (w == object_index);
    return n;
  }
};

namespace detail {

inline Vec3 shade_pixel(const ShadingParams& sp, const Vec3& p_cam, Vec3 normal,
                        const Vec3& albedo) {
  const Vec3 view = (-p_cam).normalized();
  if (normal.dot(view) < 0.0) normal = -normal;  // two-sided
  const Vec3 to_light = sp.light_position - p_cam;
  const double dist = to_light.norm();
  const Vec3 l = dist > 1e-12 ? Vec3(to_light / dist) : view;
  double diff = std::max(0.0, normal.dot(l));
  Vec3 c = albedo * (sp.ambient + sp.diffuse * diff);
  if (sp.mode == ShadingParams::Mode::phong && sp.specular > 0.0) {
    const Vec3 r = 2.0 * normal.dot(l) * normal - l;
    const double s = std::pow(std::max(0.0, r.dot(view)), sp.shininess);
    const Vec3 spec_color = (1.0 - sp.whiteness) * albedo + sp.whiteness * Vec3::Ones();
    c += sp.specular * s * spec_color;
  }
  return c.cwiseMin(1.0).cwiseMax(0.0);
}

// Top-left fill rule for the y-down, interior-positive edge convention:
// horizontal edges pointing +x bound the interior from above; edges pointing
// -y are left edges.
inline bool edge_is_top_left(double dx, double dy) {
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

}  // namespace detail

inline SceneRender rasterize_scene(const std::vector<SceneObject>& objects,
                                   const PinholeView& view, const ShadingParams& shading) {
  require(view.width >= 1 && view.height >= 1 && view.fx > 0.0 && view.fy > 0.0,
          "rasterize_scene: invalid view");
  SceneRender out;
  out.width = view.width;
  out.height = view.height;
  out.color = Image(view.width, view.height, 0.0f);
  out.depth.assign(size_t(view.width) * view.height, std::numeric_limits<float>::infinity());
  out.winner.assign(size_t(view.width) * view.height, -1);

  constexpr double kMinDepth = 1e-6;  // triangles touching this plane are dropped

  for (int oi = 0; oi < int(objects.size()); ++oi) {
    const TriangleMesh& mesh = *objects[oi].mesh;
    const Pose& pose = objects[oi].pose;
    std::vector<Vec3> cam(mesh.vertices.size());
    std::vector<Vec3> nrm(mesh.normals.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      cam[i] = pose.rotation * mesh.vertices[i] + pose.translation;
      nrm[i] = pose.rotation * mesh.normals[i];
    }
    for (const auto& tri : mesh.triangles) {
      const Vec3& p0 = cam[tri[0]];
      const Vec3& p1 = cam[tri[1]];
      const Vec3& p2 = cam[tri[2]];
      if (p0.z() <= kMinDepth || p1.z() <= kMinDepth || p2.z() <= kMinDepth) continue;

      Vec2 s0(view.fx * p0.x() / p0.z() + view.cx, view.fy * p0.y() / p0.z() + view.cy);
      Vec2 s1(view.fx * p1.x() / p1.z() + view.cx, view.fy * p1.y() / p1.z() + view.cy);
      Vec2 s2(view.fx * p2.x() / p2.z() + view.cx, view.fy * p2.y() / p2.z() + view.cy);
      int i0 = tri[0], i1 = tri[1], i2 = tri[2];
      double area2 = (s1.x() - s0.x()) * (s2.y() - s0.y()) - (s1.y() - s0.y()) * (s2.x() - s0.x());
      if (area2 == 0.0) continue;
      if (area2 < 0.0) {  // flip to interior-positive orientation
        std::swap(s1, s2);
        std::swap(i1, i2);
        area2 = -area2;
      }

      const int min_x = std::max(0, int(std::ceil(std::min({s0.x(), s1.x(), s2.x()}))));
      const int max_x = std::min(view.width - 1, int(std::floor(std::max({s0.x(), s1.x(), s2.x()}))));
      const int min_y = std::max(0, int(std::ceil(std::min({s0.y(), s1.y(), s2.y()}))));
      const int max_y = std::min(view.height - 1, int(std::floor(std::max({s0.y(), s1.y(), s2.y()}))));
      if (min_x > max_x || min_y > max_y) continue;

      // Edge i is opposite vertex i; E(p) = dx*(py-ay) - dy*(px-ax).
      const Vec2 va[3] = {s1, s2, s0};
      const Vec2 vb[3] = {s2, s0, s1};
      double dx[3], dy[3];
      bool top_left[3];
      for (int e = 0; e < 3; ++e) {
        dx[e] = vb[e].x() - va[e].x();
        dy[e] = vb[e].y() - va[e].y();
        top_left[e] = detail::edge_is_top_left(dx[e], dy[e]);
      }
      const double inv_z[3] = {1.0 / cam[i0].z(), 1.0 / cam[i1].z(), 1.0 / cam[i2].z()};
      const Vec3* vn[3] = {&nrm[i0], &nrm[i1], &nrm[i2]};
      const Vec3* alb[3] = {&mesh.albedo[i0], &mesh.albedo[i1], &mesh.albedo[i2]};

      for (int y = min_y; y <= max_y; ++y) {
        for (int x = min_x; x <= max_x; ++x) {
          double lambda[3];
          bool inside = true;
          for (int e = 0; e < 3 && inside; ++e) {
            const double ev = dx[e] * (y - va[e].y()) - dy[e] * (x - va[e].x());
            if (ev > 0.0) lambda[e] = ev;
            else if (ev == 0.0 && top_left[e]) lambda[e] = 0.0;
            else inside = false;
          }
          if (!inside) continue;
          lambda[0] /= area2;
          lambda[1] /= area2;
          lambda[2] /= area2;
          // perspective-correct weights
          const double denom =
              lambda[0] * inv_z[0] + lambda[1] * inv_z[1] + lambda[2] * inv_z[2];
          const double z = 1.0 / denom;
          const size_t px = size_t(y) * view.width + x;
          if (float(z) >= out.depth[px]) continue;
          double w[3];
          for (int k = 0; k < 3; ++k) w[k] = lambda[k] * inv_z[k] * z;
          Vec3 normal = w[0] * *vn[0] + w[1] * *vn[1] + w[2] * *vn[2];
          const double nlen = normal.norm();
          const Vec3 albedo = w[0] * *alb[0] + w[1] * *alb[1] + w[2] * *alb[2];
          const Vec3 p_cam((x - view.cx) / view.fx * z, (y - view.cy) / view.fy * z, z);
          normal = nlen > 1e-12 ? Vec3(normal / nlen) : Vec3(-p_cam.normalized());
          const Vec3 c = detail::shade_pixel(shading, p_cam, normal, albedo);
          out.color.set(x, y, float(c.x()), float(c.y()), float(c.z()));
          out.depth[px] = float(z);
          out.winner[px] = oi;
        }
      }
    }
  }
  return out;
}

namespace detail {

// Upsample a scene render into a RenderOutput at the zoom's out_resolution:
// color bilinear, mask by thresholding bilinear coverage at 0.5, depth by
// nearest (falling back to the nearest covered neighbor so that mask and
// depth stay consistent).
inline RenderOutput upsample_to_patch(const SceneRender& native, const ZoomedCamera& zoom,
                                      const std::vector<float>& coverage) {
  const int out_res = zoom.out_resolution;
  RenderOutput out;
  out.color.camera = zoom;
  out.color.pixels = Image(out_res, out_res, 0.0f);
  out.mask.assign(size_t(out_res) * out_res, 0);
  out.depth.assign(size_t(out_res) * out_res, std::numeric_limits<float>::infinity());
  const double scale = double(native.width) / out_res;
  for (int y = 0; y < out_res; ++y) {
    const double sy = y * scale;
    for (int x = 0; x < out_res; ++x) {
      const double sx = x * scale;
      const double cov = sample_bilinear_plane(coverage, native.width, native.height, sx, sy);
      if (cov < 0.5) continue;
      const size_t px = size_t(y) * out_res + x;
      // nearest sample, else nearest covered 2x2 neighbor
      const int nx = std::clamp(int(std::lround(sx)), 0, native.width - 1);
      const int ny = std::clamp(int(std::lround(sy)), 0, native.height - 1);
      float d = native.depth[size_t(ny) * native.width + nx];
      if (!std::isfinite(d)) {
        const int x0 = std::clamp(int(std::floor(sx)), 0, native.width - 1);
        const int y0 = std::clamp(int(std::floor(sy)), 0, native.height - 1);
        for (int j = 0; j <= 1; ++j)
          for (int i = 0; i <= 1; ++i) {
            const int xi = std::min(x0 + i, native.width - 1);
            const int yj = std::min(y0 + j, native.height - 1);
            d = std::min(d, native.depth[size_t(yj) * native.width + xi]);
          }
        if (!std::isfinite(d)) continue;
      }
      const auto c = sample_bilinear(native.color, sx, sy);
      out.color.pixels.set(x, y, c[0], c[1], c[2]);
      out.mask[px] = 1;
      out.depth[px] = d;
    }
  }
  return out;
}

inline std::vector<float> winner_coverage(const SceneRender& render, int object_index) {
  std::vector<float> cov(render.winner.size());
  for (size_t i = 0; i < render.winner.size(); ++i)
    cov[i] = render.winner[i] == object_index ? 1.0f : 0.0f;
  return cov;
}

inline std::vector<float> any_coverage(const SceneRender& render) {
  std::vector<float> cov(render.winner.size());
  for (size_t i = 0; i < render.winner.size(); ++i) cov[i] = render.winner[i] >= 0 ? 1.0f : 0.0f;
  return cov;
}

}  // namespace detail

// Render one mesh under a pose into the zoom patch. Rasterizes at
// render_resolution under the zoom's effective intrinsics, then bilinearly
// upsamples to the patch resolution.
inline RenderOutput render(const TriangleMesh& mesh, const Pose& pose, const ZoomedCamera& zoom,
                           const ShadingParams& shading, int render_resolution = 256) {
  require(zoom.patch_side > 0.0, "render: degenerate zoom (patch_side <= 0)");
  require(render_resolution >= 2 && render_resolution <= zoom.out_resolution,
          "render: render_resolution must be in [2, out_resolution]");
  const SceneRender native =
      rasterize_scene({{&mesh, pose}}, view_from_zoom(zoom, render_resolution), shading);
  return detail::upsample_to_patch(native, zoom, detail::any_coverage(native));
}

// Joint z-buffered render of a scene into the zoom patch; also reports how
// many patch pixels the target object wins against the occluders.
inline std::pair<RenderOutput, int> render_with_occluders(const std::vector<SceneObject>& scene,
                                                          int target_index,
                                                          const ZoomedCamera& zoom,
                                                          const ShadingParams& shading,
                                                          int render_resolution = 256) {
  require(target_index >= 0 && target_index < int(scene.size()),
          "render_with_occluders: target index out of range");
  require(zoom.patch_side > 0.0, "render_with_occluders: degenerate zoom");
  const SceneRender native =
      rasterize_scene(scene, view_from_zoom(zoom, render_resolution), shading);
  RenderOutput out = detail::upsample_to_patch(native, zoom, detail::any_coverage(native));

  // Count with the same coverage-threshold convention as the mask so that an
  // occluder-free scene reproduces the solo mask count exactly.
  const std::vector<float> target_cov = detail::winner_coverage(native, target_index);
  const int out_res = zoom.out_resolution;
  const double scale = double(native.width) / out_res;
  int visible = 0;
  for (int y = 0; y < out_res; ++y)
    for (int x = 0; x < out_res; ++x)
      if (sample_bilinear_plane(target_cov, native.width, native.height, x * scale, y * scale) >=
          0.5)
        ++visible;
  return {std::move(out), visible};
}

}  // namespace ppc

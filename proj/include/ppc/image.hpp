#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ppc/common.hpp"

namespace ppc {

// Interleaved RGB image, float values in [0,1]. Integer pixel coordinates
// address pixel centers.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // 3 * width * height, row-major

  Image() = default;
  Image(int w, int h, float fill = 0.0f) : width(w), height(h), data(3 * size_t(w) * h, fill) {}

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  float* px(int x, int y) { return data.data() + 3 * (size_t(y) * width + x); }
  const float* px(int x, int y) const { return data.data() + 3 * (size_t(y) * width + x); }

  void set(int x, int y, float r, float g, float b) {
    float* p = px(x, y);
    p[0] = r; p[1] = g; p[2] = b;
  }

  std::array<float, 3> at(int x, int y) const {
    const float* p = px(x, y);
    return {p[0], p[1], p[2]};
  }

  double mean() const {
    double s = 0.0;
    for (float v : data) s += v;
    return data.empty() ? 0.0 : s / double(data.size());
  }
};

// Bilinear sample at continuous coordinates; out-of-bounds taps read as black.
inline std::array<float, 3> sample_bilinear(const Image& img, double x, double y) {
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  std::array<float, 3> out = {0.0f, 0.0f, 0.0f};
  const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  for (int i = 0; i < 4; ++i) {
    if (w[i] == 0.0 || !img.in_bounds(xs[i], ys[i])) continue;
    const float* p = img.px(xs[i], ys[i]);
    out[0] += float(w[i] * p[0]);
    out[1] += float(w[i] * p[1]);
    out[2] += float(w[i] * p[2]);
  }
  return out;
}

// Scalar-plane bilinear sample (masks, coverage), out-of-bounds reads 0.
inline double sample_bilinear_plane(const std::vector<float>& plane, int width, int height,
                                    double x, double y) {
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  double out = 0.0;
  const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  for (int i = 0; i < 4; ++i) {
    if (w[i] == 0.0 || xs[i] < 0 || xs[i] >= width || ys[i] < 0 || ys[i] >= height) continue;
    out += w[i] * plane[size_t(ys[i]) * width + xs[i]];
  }
  return out;
}

// Bilinear resize mapping output pixel centers to input coordinates by pure
// scale (0 maps to 0), matching the patch coordinate convention.
inline Image resize_bilinear(const Image& src, int out_w, int out_h) {
  Image out(out_w, out_h);
  const double sx = double(src.width) / out_w;
  const double sy = double(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const auto c = sample_bilinear(src, x * sx, y * sy);
      out.set(x, y, c[0], c[1], c[2]);
    }
  }
  return out;
}

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian blur, clamp-to-edge borders. sigma <= 0 is a no-op.
inline Image gaussian_blur(const Image& src, double sigma) {
  if (sigma <= 0.0) return src;
  const auto k = gaussian_kernel(sigma);
  const int radius = int(k.size() / 2);
  Image tmp(src.width, src.height);
  Image out(src.width, src.height);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double acc[3] = {0, 0, 0};
      for (int i = -radius; i <= radius; ++i) {
        const int xi = std::clamp(x + i, 0, src.width - 1);
        const float* p = src.px(xi, y);
        const double w = k[i + radius];
        acc[0] += w * p[0]; acc[1] += w * p[1]; acc[2] += w * p[2];
      }
      tmp.set(x, y, float(acc[0]), float(acc[1]), float(acc[2]));
    }
  }
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double acc[3] = {0, 0, 0};
      for (int i = -radius; i <= radius; ++i) {
        const int yi = std::clamp(y + i, 0, src.height - 1);
        const float* p = tmp.px(x, yi);
        const double w = k[i + radius];
        acc[0] += w * p[0]; acc[1] += w * p[1]; acc[2] += w * p[2];
      }
      out.set(x, y, float(acc[0]), float(acc[1]), float(acc[2]));
    }
  }
  return out;
}

inline std::vector<float> gaussian_blur_plane(const std::vector<float>& src, int width, int height,
                                              double sigma) {
  if (sigma <= 0.0) return src;
  const auto k = gaussian_kernel(sigma);
  const int radius = int(k.size() / 2);
  std::vector<float> tmp(src.size()), out(src.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * src[size_t(y) * width + std::clamp(x + i, 0, width - 1)];
      tmp[size_t(y) * width + x] = float(acc);
    }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * tmp[size_t(std::clamp(y + i, 0, height - 1)) * width + x];
      out[size_t(y) * width + x] = float(acc);
    }
  return out;
}

// RGB <-> HSV with all channels in [0,1].
inline std::array<float, 3> rgb_to_hsv(float r, float g, float b) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  float h = 0.0f;
  if (d > 0.0f) {
    if (mx == r) h = std::fmod((g - b) / d, 6.0f);
    else if (mx == g) h = (b - r) / d + 2.0f;
    else h = (r - g) / d + 4.0f;
    h /= 6.0f;
    if (h < 0.0f) h += 1.0f;
  }
  const float s = mx > 0.0f ? d / mx : 0.0f;
  return {h, s, mx};
}

inline std::array<float, 3> hsv_to_rgb(float h, float s, float v) {
  const float hh = std::fmod(std::max(h, 0.0f), 1.0f) * 6.0f;
  const int i = std::min(5, int(hh));
  const float f = hh - i;
  const float p = v * (1.0f - s);
  const float q = v * (1.0f - s * f);
  const float t = v * (1.0f - s * (1.0f - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

}  // namespace ppc

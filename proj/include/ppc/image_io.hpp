#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ppc/common.hpp"
#include "ppc/image.hpp"

namespace ppc {
namespace detail {

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

inline std::uint32_t get_u32_be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::vector<std::uint8_t>& data) {
  put_u32_be(out, std::uint32_t(data.size()));
  const size_t type_pos = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  std::uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + type_pos, uInt(4 + data.size()));
  put_u32_be(out, crc);
}

inline std::vector<std::uint8_t> zlib_compress(const std::vector<std::uint8_t>& raw) {
  uLongf bound = compressBound(uLong(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: zlib compression failed");
  out.resize(bound);
  return out;
}

inline std::vector<std::uint8_t> zlib_decompress(const std::vector<std::uint8_t>& data,
                                                 size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf len = uLongf(expected);
  const int rc = uncompress(out.data(), &len, data.data(), uLong(data.size()));
  if (rc != Z_OK || len != expected) throw ParseError("png: corrupt compressed data");
  return out;
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

// PNG with filter 0 rows and a fixed compression level; byte-stable output.
inline std::vector<std::uint8_t> encode_png_raw(const std::uint8_t* pixels, int width, int height,
                                                int channels, int bit_depth) {
  std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<std::uint8_t> ihdr;
  put_u32_be(ihdr, std::uint32_t(width));
  put_u32_be(ihdr, std::uint32_t(height));
  ihdr.push_back(std::uint8_t(bit_depth));
  ihdr.push_back(channels == 3 ? 2 : 0);  // truecolor or grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  append_chunk(png, "IHDR", ihdr);

  const size_t row_bytes = size_t(width) * channels * (bit_depth / 8);
  std::vector<std::uint8_t> raw;
  raw.reserve((row_bytes + 1) * height);
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), pixels + y * row_bytes, pixels + (y + 1) * row_bytes);
  }
  append_chunk(png, "IDAT", zlib_compress(raw));
  append_chunk(png, "IEND", {});
  return png;
}

}  // namespace detail

inline std::uint8_t float_to_u8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return std::uint8_t(std::lround(c * 255.0f));
}

// 8-bit RGB PNG bytes of the image.
inline std::vector<std::uint8_t> encode_png(const Image& img) {
  std::vector<std::uint8_t> bytes(size_t(img.width) * img.height * 3);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = float_to_u8(img.data[i]);
  return detail::encode_png_raw(bytes.data(), img.width, img.height, 3, 8);
}

// 16-bit grayscale PNG storing depth in millimeters; background (+inf) maps
// to 0.
inline std::vector<std::uint8_t> encode_depth_png(const std::vector<float>& depth, int width,
                                                  int height) {
  std::vector<std::uint8_t> bytes(size_t(width) * height * 2);
  for (size_t i = 0; i < depth.size(); ++i) {
    std::uint16_t mm = 0;
    if (std::isfinite(depth[i]))
      mm = std::uint16_t(std::clamp(std::lround(depth[i] * 1000.0), 1L, 65535L));
    bytes[2 * i] = std::uint8_t(mm >> 8);
    bytes[2 * i + 1] = std::uint8_t(mm & 0xff);
  }
  return detail::encode_png_raw(bytes.data(), width, height, 1, 16);
}

inline std::vector<std::uint8_t> encode_mask_png(const std::vector<std::uint8_t>& mask, int width,
                                                 int height) {
  std::vector<std::uint8_t> bytes(size_t(width) * height);
  for (size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  return detail::encode_png_raw(bytes.data(), width, height, 1, 8);
}

struct DecodedPng {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<std::uint8_t> bytes;  // unfiltered samples, row-major
};

inline DecodedPng decode_png(const std::vector<std::uint8_t>& file) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (file.size() < 8 || std::memcmp(file.data(), sig, 8) != 0)
    throw ParseError("png: bad signature");
  DecodedPng out;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  size_t pos = 8;
  while (pos + 8 <= file.size()) {
    const std::uint32_t len = detail::get_u32_be(&file[pos]);
    if (pos + 12 + len > file.size()) throw ParseError("png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
    const std::uint8_t* data = &file[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw ParseError("png: bad IHDR");
      out.width = int(detail::get_u32_be(data));
      out.height = int(detail::get_u32_be(data + 4));
      out.bit_depth = data[8];
      color_type = data[9];
      if (data[12] != 0) throw ParseError("png: interlaced images not supported");
      if (out.bit_depth != 8 && out.bit_depth != 16)
        throw ParseError("png: only 8/16-bit depths supported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (out.width <= 0 || out.height <= 0) throw ParseError("png: missing IHDR");
  switch (color_type) {
    case 0: out.channels = 1; break;
    case 2: out.channels = 3; break;
    case 4: out.channels = 2; break;
    case 6: out.channels = 4; break;
    default: throw ParseError("png: unsupported color type (palette?)");
  }
  const int bytes_per_sample = out.bit_depth / 8;
  const size_t bpp = size_t(out.channels) * bytes_per_sample;
  const size_t row_bytes = size_t(out.width) * bpp;
  const auto raw = detail::zlib_decompress(idat, (row_bytes + 1) * out.height);

  out.bytes.assign(row_bytes * out.height, 0);
  std::vector<std::uint8_t> prev(row_bytes, 0);
  for (int y = 0; y < out.height; ++y) {
    const std::uint8_t filter = raw[(row_bytes + 1) * y];
    const std::uint8_t* src = &raw[(row_bytes + 1) * y + 1];
    std::uint8_t* dst = &out.bytes[row_bytes * y];
    for (size_t i = 0; i < row_bytes; ++i) {
      const int a = i >= bpp ? dst[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= bpp ? prev[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += detail::paeth(a, b, c); break;
        default: throw ParseError("png: unknown filter type");
      }
      dst[i] = std::uint8_t(v & 0xff);
    }
    std::memcpy(prev.data(), dst, row_bytes);
  }
  return out;
}

inline Image image_from_png(const std::vector<std::uint8_t>& file) {
  const DecodedPng png = decode_png(file);
  Image img(png.width, png.height);
  const int n = png.channels;
  const int step = png.bit_depth / 8;
  const double scale = png.bit_depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
  for (size_t p = 0; p < size_t(png.width) * png.height; ++p) {
    const std::uint8_t* s = &png.bytes[p * n * step];
    auto sample = [&](int ch) {
      const std::uint8_t* q = s + ch * step;
      const unsigned v = step == 1 ? *q : (unsigned(q[0]) << 8) | q[1];
      return float(v * scale);
    };
    float r, g, b;
    if (n >= 3) { r = sample(0); g = sample(1); b = sample(2); }
    else { r = g = b = sample(0); }  // grayscale (alpha ignored)
    img.data[3 * p] = r;
    img.data[3 * p + 1] = g;
    img.data[3 * p + 2] = b;
  }
  return img;
}

// --- PPM (binary P6), used for tiny test fixtures ---

inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                       "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (float v : img.data) out.push_back(float_to_u8(v));
  return out;
}

inline Image image_from_ppm(const std::vector<std::uint8_t>& file) {
  std::string text(file.begin(), file.end());
  std::istringstream in(text);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) throw ParseError("ppm: bad header");
  in.get();  // single whitespace after maxval
  const size_t offset = size_t(in.tellg());
  if (file.size() < offset + size_t(w) * h * 3) throw ParseError("ppm: truncated pixel data");
  Image img(w, h);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = file[offset + i] / 255.0f;
  return img;
}

// --- file helpers ---

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

inline void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline Image load_image(const std::string& path) {
  const auto bytes = read_binary_file(path);
  if (ends_with(path, ".ppm")) return image_from_ppm(bytes);
  return image_from_png(bytes);
}

inline void save_image(const std::string& path, const Image& img) {
  write_binary_file(path, ends_with(path, ".ppm") ? encode_ppm(img) : encode_png(img));
}

}  // namespace ppc

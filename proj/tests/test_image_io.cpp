#include <catch2/catch_amalgamated.hpp>

#include "ppc/base64.hpp"
#include "ppc/image_io.hpp"
#include "ppc/random.hpp"
#include "test_helpers.hpp"

using namespace ppc;

TEST_CASE("base64 standard vectors") {
  auto enc = [](const std::string& s) {
    return base64_encode(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  };
  REQUIRE(enc("Man") == "TWFu");
  REQUIRE(enc("Ma") == "TWE=");
  REQUIRE(enc("M") == "TQ==");
  REQUIRE(enc("") == "");
  REQUIRE_THROWS_AS(base64_decode("T!=="), std::invalid_argument);
}

TEST_CASE("base64 round trip") {
  Rng rng(1);
  for (int n : {0, 1, 2, 3, 100, 257}) {
    std::vector<std::uint8_t> data(n);
    for (auto& b : data) b = std::uint8_t(rng.next_u64() & 0xff);
    REQUIRE(base64_decode(base64_encode(data)) == data);
  }
}

namespace {
Image random_image(int w, int h, std::uint64_t seed) {
  Image img(w, h);
  Rng rng(seed);
  for (float& v : img.data) v = float(rng.uniform_index(256)) / 255.0f;
  return img;
}
}  // namespace

TEST_CASE("png round trip is exact for 8-bit data") {
  const Image img = random_image(37, 23, 9);
  const auto bytes = encode_png(img);
  const Image back = image_from_png(bytes);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  REQUIRE(back.data == img.data);
}

TEST_CASE("png encoding is byte-stable") {
  const Image img = random_image(64, 48, 10);
  REQUIRE(encode_png(img) == encode_png(img));
}

TEST_CASE("png decoder handles filtered rows") {
  // zlib-compressed output of other encoders uses filters; synthesize rows
  // with each filter type by hand and check the reconstruction.
  const int w = 5, h = 5, bpp = 3;
  std::vector<std::uint8_t> truth(size_t(w) * h * bpp);
  Rng rng(2);
  for (auto& b : truth) b = std::uint8_t(rng.next_u64() & 0xff);

  std::vector<std::uint8_t> raw;
  std::vector<std::uint8_t> prev(size_t(w) * bpp, 0);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t filter = std::uint8_t(y % 5);
    raw.push_back(filter);
    const std::uint8_t* row = &truth[size_t(y) * w * bpp];
    for (int i = 0; i < w * bpp; ++i) {
      const int a = i >= bpp ? row[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= bpp ? prev[i - bpp] : 0;
      int v = row[i];
      switch (filter) {
        case 0: break;
        case 1: v -= a; break;
        case 2: v -= b; break;
        case 3: v -= (a + b) / 2; break;
        case 4: v -= detail::paeth(a, b, c); break;
      }
      raw.push_back(std::uint8_t(v & 0xff));
    }
    std::copy(row, row + size_t(w) * bpp, prev.begin());
  }

  std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<std::uint8_t> ihdr;
  detail::put_u32_be(ihdr, w);
  detail::put_u32_be(ihdr, h);
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
  detail::append_chunk(png, "IHDR", ihdr);
  detail::append_chunk(png, "IDAT", detail::zlib_compress(raw));
  detail::append_chunk(png, "IEND", {});

  const DecodedPng decoded = decode_png(png);
  REQUIRE(decoded.bytes == truth);
}

TEST_CASE("depth png uses 16-bit millimeters") {
  std::vector<float> depth = {0.001f, 1.0f, 2.5f, std::numeric_limits<float>::infinity()};
  const auto bytes = encode_depth_png(depth, 2, 2);
  const DecodedPng png = decode_png(bytes);
  REQUIRE(png.bit_depth == 16);
  REQUIRE(png.channels == 1);
  auto mm = [&](int i) { return (unsigned(png.bytes[2 * i]) << 8) | png.bytes[2 * i + 1]; };
  REQUIRE(mm(0) == 1);
  REQUIRE(mm(1) == 1000);
  REQUIRE(mm(2) == 2500);
  REQUIRE(mm(3) == 0);  // background
}

TEST_CASE("ppm round trip") {
  const Image img = random_image(9, 4, 3);
  const Image back = image_from_ppm(encode_ppm(img));
  REQUIRE(back.data == img.data);
}

TEST_CASE("image file helpers") {
  test::TempDir dir("imageio");
  const Image img = random_image(16, 16, 4);
  save_image(dir.file("a.png"), img);
  save_image(dir.file("a.ppm"), img);
  REQUIRE(load_image(dir.file("a.png")).data == img.data);
  REQUIRE(load_image(dir.file("a.ppm")).data == img.data);
  REQUIRE_THROWS_AS(load_image(dir.file("missing.png")), ParseError);
}

TEST_CASE("corrupt png is rejected") {
  REQUIRE_THROWS_AS(image_from_png({1, 2, 3, 4}), ParseError);
}

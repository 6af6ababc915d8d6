#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "dragonfly/error.hpp"
#include "dragonfly/gridplan.hpp"
#include "dragonfly/imaging.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dragonfly;
using dragonfly::testing::bilinear_oracle;
using dragonfly::testing::bilinear_oracle_real;

namespace {

ImageBuffer random_image(std::mt19937_64& rng, std::uint32_t w, std::uint32_t h) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> data(std::size_t{w} * h * 3);
  for (auto& v : data) v = static_cast<std::uint8_t>(byte(rng));
  return ImageBuffer(w, h, std::move(data));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("ImageBuffer rejects bad shapes") {
  CHECK(code_of([] { ImageBuffer(0, 4, {}); }) == ErrorCode::InvalidDimension);
  CHECK(code_of([] { ImageBuffer(2, 2, std::vector<std::uint8_t>(11)); }) == ErrorCode::InvalidDimension);
}

TEST_CASE("decode_image: PNG") {
  SUBCASE("1x1 red") {
    const auto png = testing::encode_png(1, 1, 3, {255, 0, 0});
    const ImageBuffer img = decode_image(png);
    CHECK(img == ImageBuffer(1, 1, {255, 0, 0}));
  }
  SUBCASE("grayscale is replicated") {
    const auto png = testing::encode_png(2, 2, 1, {128, 128, 128, 128});
    const ImageBuffer img = decode_image(png);
    REQUIRE(img.width() == 2);
    for (auto v : img.data()) CHECK(v == 128);
  }
  SUBCASE("alpha is dropped without touching color") {
    const auto png = testing::encode_png(2, 1, 4, {10, 20, 30, 0, 200, 100, 50, 77});
    CHECK(decode_image(png) == ImageBuffer(2, 1, {10, 20, 30, 200, 100, 50}));
  }
  SUBCASE("truncated PNG") {
    auto png = testing::encode_png(8, 8, 3, std::vector<std::uint8_t>(8 * 8 * 3, 9));
    png.resize(png.size() / 2);
    CHECK(code_of([&] { decode_image(png); }) == ErrorCode::DecodeError);
  }
}

TEST_CASE("decode_image: JPEG") {
  const ImageBuffer src = ImageBuffer::filled(16, 16, {40, 120, 200});
  auto jpg = testing::encode_jpeg(src, 95);

  SUBCASE("round trip within codec loss") {
    const ImageBuffer img = decode_image(jpg);
    REQUIRE(img.width() == 16);
    REQUIRE(img.height() == 16);
    for (std::uint32_t c = 0; c < 3; ++c) CHECK(std::abs(int(img.at(7, 7, c)) - int(src.at(7, 7, c))) <= 4);
  }
  SUBCASE("truncated stream") {
    jpg.resize(jpg.size() / 2);
    CHECK(code_of([&] { decode_image(jpg); }) == ErrorCode::DecodeError);
  }
}

TEST_CASE("decode_image: DFIM fixtures and unknown formats") {
  const ImageBuffer img(2, 1, {1, 2, 3, 4, 5, 6});
  CHECK(decode_image(encode_dfim(img)) == img);

  auto bytes = encode_dfim(img);
  bytes.pop_back();
  CHECK(code_of([&] { decode_image(bytes); }) == ErrorCode::DecodeError);

  const std::vector<std::uint8_t> junk = {'h', 'e', 'l', 'l', 'o'};
  CHECK(code_of([&] { decode_image(junk); }) == ErrorCode::DecodeError);
  CHECK(code_of([&] { decode_image(std::vector<std::uint8_t>{}); }) == ErrorCode::DecodeError);
}

TEST_CASE("resize: identity, constants, and bounds") {
  std::mt19937_64 rng(1);
  const ImageBuffer img = random_image(rng, 37, 21);
  CHECK(resize(img, 37, 21) == img);

  const ImageBuffer flat = ImageBuffer::filled(500, 300, {17, 128, 254});
  for (auto [w, h] : {std::pair{1u, 1u}, {336u, 336u}, {1008u, 4032u}, {3u, 777u}, {499u, 301u}}) {
    const ImageBuffer out = resize(flat, w, h);
    CHECK(out == ImageBuffer::filled(w, h, {17, 128, 254}));
  }
  CHECK(code_of([&] { resize(img, 0, 5); }) == ErrorCode::InvalidDimension);
}

TEST_CASE("resize: 4x4 checkerboard to 2x2") {
  std::vector<std::uint8_t> data;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) data.push_back((x + y) % 2 ? 255 : 0);
  const ImageBuffer board(4, 4, data);
  const ImageBuffer out = resize(board, 2, 2);

  // Each output center falls between four source pixels (two 0, two 255):
  // 127.5 rounds half-to-even to 128. Frozen from the double-precision oracle.
  CHECK(std::vector<std::uint8_t>(out.data().begin(), out.data().end()) == bilinear_oracle(board, 2, 2));
  for (auto v : out.data()) CHECK(v == 128);
}

TEST_CASE("resize agrees with the double-precision oracle") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint32_t> side(1, 60);
  for (int trial = 0; trial < 60; ++trial) {
    const ImageBuffer img = random_image(rng, side(rng), side(rng));
    const std::uint32_t tw = side(rng) * 2;
    const std::uint32_t th = side(rng) * 2;
    const ImageBuffer out = resize(img, tw, th);
    const auto real = bilinear_oracle_real(img, tw, th);
    const auto rounded = bilinear_oracle(img, tw, th);
    for (std::size_t i = 0; i < real.size(); ++i) {
      // float32 vs double only disagrees on values sitting near a .5 boundary.
      const double frac = real[i] - std::floor(real[i]);
      if (std::fabs(frac - 0.5) > 1e-3) {
        REQUIRE(out.data()[i] == rounded[i]);
      } else {
        REQUIRE(std::abs(int(out.data()[i]) - int(rounded[i])) <= 1);
      }
    }
  }
}

TEST_CASE("extract_tile") {
  std::mt19937_64 rng(3);
  const ImageBuffer img = random_image(rng, 672, 672);

  CHECK(extract_tile(img, {0, 0, 672, 672}) == img);

  const ImageBuffer quadrant = extract_tile(img, {336, 0, 336, 336});
  REQUIRE(quadrant.width() == 336);
  for (std::uint32_t y = 0; y < 336; y += 7)
    for (std::uint32_t x = 0; x < 336; x += 5)
      for (std::uint32_t c = 0; c < 3; ++c) REQUIRE(quadrant.at(x, y, c) == img.at(336 + x, y, c));

  CHECK(code_of([&] { extract_tile(img, {600, 0, 336, 336}); }) == ErrorCode::OutOfBounds);
  CHECK(code_of([&] { extract_tile(img, {0, 0, 0, 1}); }) == ErrorCode::OutOfBounds);
  CHECK(code_of([&] { extract_tile(img, {0xFFFFFFFFu, 0, 2, 2}); }) == ErrorCode::OutOfBounds);
}

TEST_CASE("tiles of a crop plan partition the resized image") {
  std::mt19937_64 rng(4);
  PipelineConfig config;
  config.resolution = 28;
  config.patch_size = 14;
  config.pool_stride = 1;
  for (int trial = 0; trial < 20; ++trial) {
    const ImageBuffer img = random_image(rng, 10 + trial * 13, 90 - trial * 3);
    const CropPlan plan = plan_crops(img.width(), img.height(), config);
    for (const auto* tier : {&*plan.medium, &*plan.high}) {
      const ImageBuffer resized = resize(img, tier->target.w, tier->target.h);
      std::vector<int> hits(std::size_t{resized.width()} * resized.height(), 0);
      std::uint64_t tile_sum = 0;
      for (const auto& rect : tier->rects) {
        const ImageBuffer t = extract_tile(resized, rect);
        tile_sum = std::accumulate(t.data().begin(), t.data().end(), tile_sum);
        for (std::uint32_t y = 0; y < rect.h; ++y)
          for (std::uint32_t x = 0; x < rect.w; ++x) hits[(rect.y + y) * resized.width() + rect.x + x]++;
      }
      const std::uint64_t full_sum = std::accumulate(resized.data().begin(), resized.data().end(), std::uint64_t{0});
      CHECK(tile_sum == full_sum);
      CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
  }
}

TEST_CASE("normalize") {
  const ChannelStats zero = {0, 0, 0};
  const ChannelStats one = {1, 1, 1};
  CHECK(normalize(ImageBuffer::filled(1, 1, {255, 255, 255}), zero, one).data[0] == 1.0f);

  // Pixel equal to 255 * mean centers to zero.
  const ChannelStats half = {0.2f, 0.4f, 0.6f};
  const auto centered = normalize(ImageBuffer::filled(1, 1, {51, 102, 153}), half, {0.3f, 7.0f, 0.01f});
  for (float v : centered.data) CHECK(std::fabs(v) < 1e-6f);

  const auto t = normalize(ImageBuffer::filled(1, 1, {128, 128, 128}), {0.5f, 0.5f, 0.5f}, {0.25f, 0.25f, 0.25f});
  CHECK(t.data[0] == doctest::Approx((128.0 / 255.0 - 0.5) / 0.25).epsilon(1e-6));
  CHECK(t.data[0] == doctest::Approx(0.00784).epsilon(1e-3));

  CHECK(code_of([] { normalize(ImageBuffer::filled(1, 1, {0, 0, 0}), {0, 0, 0}, {1, 0, 1}); }) ==
        ErrorCode::InvalidNormalization);
}

TEST_CASE("normalize layout is channel-planar") {
  const ImageBuffer img(2, 1, {1, 2, 3, 4, 5, 6});
  const auto t = normalize(img, {0, 0, 0}, {1.0f / 255, 1.0f / 255, 1.0f / 255});
  REQUIRE(t.data.size() == 6);
  CHECK(t.at(0, 0, 0) == doctest::Approx(1));
  CHECK(t.at(0, 0, 1) == doctest::Approx(4));
  CHECK(t.at(2, 0, 1) == doctest::Approx(6));
}

TEST_CASE("normalize then denormalize recovers every 8-bit value") {
  std::vector<std::uint8_t> ramp;
  for (int v = 0; v < 256; ++v) ramp.insert(ramp.end(), {std::uint8_t(v), std::uint8_t(255 - v), std::uint8_t(v ^ 0x5A)});
  const ImageBuffer img(256, 1, ramp);
  const ChannelStats mean = {0.48145466f, 0.4578275f, 0.40821073f};
  const ChannelStats sd = {0.26862954f, 0.26130258f, 0.27577711f};
  const auto back = denormalize(normalize(img, mean, sd), mean, sd);
  for (std::uint32_t c = 0; c < 3; ++c)
    for (std::uint32_t x = 0; x < 256; ++x) {
      const float v = back[c * 256 + x];
      REQUIRE(std::fabs(v - img.at(x, 0, c)) < 1e-3f);
      REQUIRE(std::nearbyint(v) == img.at(x, 0, c));
    }
}

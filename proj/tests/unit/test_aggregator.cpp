#include <cmath>
#include <random>

#include "doctest.h"
#include "dragonfly/aggregator.hpp"
#include "dragonfly/config_io.hpp"
#include "dragonfly/counter_rng.hpp"
#include "dragonfly/error.hpp"
#include "dragonfly/pipeline.hpp"
#include "dragonfly/token_file.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dragonfly;

namespace {

TokenGrid random_grid(std::mt19937_64& rng, std::uint32_t rows, std::uint32_t cols, std::uint32_t dim) {
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  TokenGrid g(rows, cols, dim);
  for (auto& v : g.data) v = u(rng);
  return g;
}

TokenGrid filled_grid(std::uint32_t side, std::uint32_t dim, float v) {
  TokenGrid g(side, side, dim);
  std::fill(g.data.begin(), g.data.end(), v);
  return g;
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

PipelineConfig small_config() {
  PipelineConfig c;
  c.encoder_dim = 4;
  c.projection_dim = 4;
  c.projection = "identity";
  return c;
}

}  // namespace

TEST_CASE("mean_pool examples") {
  SUBCASE("constant grid") {
    const TokenGrid out = mean_pool(filled_grid(24, 3, 2.5f), 4);
    CHECK(out.rows == 6);
    CHECK(out.cols == 6);
    CHECK(out.token_count() == 36);
    for (float v : out.data) CHECK(v == 2.5f);
  }
  SUBCASE("2x2 blocks of a counting grid") {
    TokenGrid g(2, 4, 1);
    g.data = {1, 2, 3, 4, 5, 6, 7, 8};
    const TokenGrid out = mean_pool(g, 2);
    CHECK(out.data == std::vector<float>{3.5f, 5.5f});
  }
  SUBCASE("random grids against nested loops") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
      const TokenGrid g = random_grid(rng, 8, 8, 2);
      REQUIRE(testing::max_abs_diff(mean_pool(g, 2).data, testing::block_mean_oracle(g, 2).data) <= 1e-6f);
      REQUIRE(testing::max_abs_diff(mean_pool(g, 4).data, testing::block_mean_oracle(g, 4).data) <= 1e-6f);
    }
  }
  SUBCASE("indivisible") {
    CHECK(code_of([] { mean_pool(TokenGrid(24, 24, 1), 5); }) == ErrorCode::IndivisibleGrid);
    CHECK(code_of([] { mean_pool(TokenGrid(24, 24, 1), 0); }) == ErrorCode::IndivisibleGrid);
  }
}

TEST_CASE("mean_pool properties") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<float> coef(-2.0f, 2.0f);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t s = 2 + trial % 3;
    const std::uint32_t side = s * (1 + trial % 5);
    const TokenGrid a = random_grid(rng, side, side, 3);
    const TokenGrid b = random_grid(rng, side, side, 3);

    // Linearity.
    const float alpha = coef(rng);
    const float beta = coef(rng);
    TokenGrid mix = a;
    for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = alpha * a.data[i] + beta * b.data[i];
    const TokenGrid pa = mean_pool(a, s);
    const TokenGrid pb = mean_pool(b, s);
    std::vector<float> combined(pa.data.size());
    for (std::size_t i = 0; i < combined.size(); ++i) combined[i] = alpha * pa.data[i] + beta * pb.data[i];
    REQUIRE(testing::max_abs_diff(mean_pool(mix, s).data, combined) <= 1e-5f);

    // Swapping two tokens inside the same block changes nothing.
    TokenGrid swapped = a;
    const auto t0 = swapped.token(0, 0);
    const auto t1 = swapped.token(s - 1, s - 1);
    std::swap_ranges(t0.begin(), t0.end(), t1.begin());
    REQUIRE(testing::max_abs_diff(mean_pool(swapped, s).data, pa.data) <= 1e-6f);

    // The global mean survives pooling.
    for (std::uint32_t d = 0; d < 3; ++d) {
      double before = 0;
      double after = 0;
      for (std::size_t t = 0; t < a.token_count(); ++t) before += a.data[t * 3 + d];
      for (std::size_t t = 0; t < pa.token_count(); ++t) after += pa.data[t * 3 + d];
      REQUIRE(std::fabs(before / a.token_count() - after / pa.token_count()) <= 1e-5);
    }
  }
}

TEST_CASE("token budget") {
  const PipelineConfig c;
  CHECK(token_budget(c) == TokenBudget{576, 144, 1296, 2016, 40});

  PipelineConfig s2 = c;
  s2.pool_stride = 2;
  // 576 + 4 * 144 + 36 * 144.
  CHECK(token_budget(s2).total == 6336);

  PipelineConfig no_high = c;
  no_high.high_grids.clear();
  CHECK(token_budget(no_high) == TokenBudget{576, 144, 0, 720, 4});

  PipelineConfig bad = c;
  bad.pool_stride = 5;
  CHECK(code_of([&] { token_budget(bad); }) == ErrorCode::IndivisibleGrid);

  CHECK(separator_count(SeparatorPolicy::BetweenAll, 4, 36) == 40);
  CHECK(separator_count(SeparatorPolicy::BetweenCropsOnly, 4, 36) == 39);
  CHECK(separator_count(SeparatorPolicy::None, 4, 36) == 0);
  CHECK(separator_count(SeparatorPolicy::BetweenAll, 0, 0) == 0);
  CHECK(separator_count(SeparatorPolicy::BetweenCropsOnly, 1, 0) == 0);
}

TEST_CASE("assemble_sequence layout") {
  PipelineConfig c = small_config();
  c.separator_value = -7.0f;
  std::mt19937_64 rng(33);
  const TokenGrid low = random_grid(rng, 24, 24, 4);
  std::vector<TokenGrid> medium;
  std::vector<TokenGrid> high;
  for (int i = 0; i < 4; ++i) medium.push_back(random_grid(rng, 6, 6, 4));
  for (int i = 0; i < 36; ++i) high.push_back(random_grid(rng, 6, 6, 4));

  const TokenSequence seq = assemble_sequence(low, medium, high, c);
  REQUIRE(seq.size() == 2056);
  CHECK(seq.image_token_count() == 2016);
  CHECK(seq.separator_count() == 40);
  CHECK(seq.segments.size() == 41);
  CHECK(seq.tokens.size() == 2056 * 4);

  // Walk the expected order and compare every vector and entry.
  std::size_t pos = 0;
  std::uint32_t segment = 0;
  auto expect_grid = [&](const TokenGrid& g, SegmentKind kind, std::uint16_t crop) {
    REQUIRE(seq.segments[segment] == Segment{kind, crop, static_cast<std::uint32_t>(g.token_count())});
    for (std::uint32_t r = 0; r < g.rows; ++r)
      for (std::uint32_t q = 0; q < g.cols; ++q) {
        const SequenceEntry& e = seq.entries[pos];
        REQUIRE(e == SequenceEntry{EntryTag::Image, kind, crop, std::uint8_t(r), std::uint8_t(q), segment});
        const auto v = seq.vector(pos);
        const auto want = g.token(r, q);
        REQUIRE(std::equal(v.begin(), v.end(), want.begin()));
        ++pos;
      }
    ++segment;
  };
  auto expect_separator = [&] {
    REQUIRE(seq.entries[pos] == SequenceEntry{EntryTag::Separator, SegmentKind::Low, 0, 0, 0, SequenceEntry::kNoSegment});
    for (float v : seq.vector(pos)) REQUIRE(v == -7.0f);
    ++pos;
  };
  expect_grid(low, SegmentKind::Low, 0);
  for (std::uint16_t i = 0; i < 4; ++i) {
    expect_separator();
    expect_grid(medium[i], SegmentKind::Medium, i);
  }
  for (std::uint16_t i = 0; i < 36; ++i) {
    expect_separator();
    expect_grid(high[i], SegmentKind::High, i);
  }
  CHECK(pos == seq.size());

  SUBCASE("separator policies") {
    c.separator_policy = SeparatorPolicy::None;
    const TokenSequence none = assemble_sequence(low, medium, high, c);
    CHECK(none.size() == 2016);
    CHECK(none.separator_count() == 0);

    c.separator_policy = SeparatorPolicy::BetweenCropsOnly;
    const TokenSequence crops = assemble_sequence(low, medium, high, c);
    CHECK(crops.size() == 2055);
    CHECK(crops.entries[576].tag == EntryTag::Image);
    CHECK(crops.entries[576].kind == SegmentKind::Medium);
    CHECK(crops.entries[576 + 36].tag == EntryTag::Separator);
  }
  SUBCASE("wrong crop counts") {
    std::vector<TokenGrid> three(medium.begin(), medium.begin() + 3);
    CHECK(code_of([&] { assemble_sequence(low, three, high, c); }) == ErrorCode::SegmentCountMismatch);
  }
  SUBCASE("wrong shapes") {
    std::vector<TokenGrid> bad = medium;
    bad[2] = random_grid(rng, 6, 6, 5);
    CHECK(code_of([&] { assemble_sequence(low, bad, high, c); }) == ErrorCode::DimMismatch);
    bad[2] = random_grid(rng, 12, 12, 4);
    CHECK(code_of([&] { assemble_sequence(low, bad, high, c); }) == ErrorCode::DimMismatch);
    CHECK(code_of([&] { assemble_sequence(random_grid(rng, 6, 6, 4), medium, high, c); }) == ErrorCode::DimMismatch);
  }
}

TEST_CASE("tokenize_image end to end") {
  const PipelineConfig c = small_config();
  const Pipeline pipe(c);

  SUBCASE("token count and layout") {
    const TokenizeResult r = pipe.run(synthetic_image(640, 480, 1));
    CHECK(r.sequence.image_token_count() == 2016);
    CHECK(r.sequence.separator_count() == 40);
    CHECK(r.plan.medium->grid == GridSpec{2, 2});
  }
  SUBCASE("zero-normalized image gives zero tokens") {
    // A pixel value equal to 255 * mean maps to zero after normalization.
    PipelineConfig mid = c;
    mid.mean = {128.0f / 255.0f, 128.0f / 255.0f, 128.0f / 255.0f};
    const TokenizeResult r = Pipeline(mid).run(ImageBuffer::filled(90, 50, {128, 128, 128}));
    for (std::size_t i = 0; i < r.sequence.size(); ++i) {
      if (r.sequence.entries[i].tag != EntryTag::Image) continue;
      for (float v : r.sequence.vector(i)) REQUIRE(std::fabs(v) <= 1e-6f);
    }
  }
  SUBCASE("random sizes always give the same budget") {
    std::mt19937_64 rng(34);
    std::uniform_int_distribution<std::uint32_t> side(1, 900);
    for (int i = 0; i < 6; ++i) {
      const TokenizeResult r = pipe.run(synthetic_image(side(rng), side(rng), i));
      REQUIRE(r.sequence.image_token_count() == 2016);
      REQUIRE(r.sequence.size() == 2056);
    }
  }
  SUBCASE("parallel crops match a sequential run") {
    const ImageBuffer img = synthetic_image(300, 777, 5);
    CHECK(pipe.run(img, 1).sequence == pipe.run(img, 4).sequence);
  }
  SUBCASE("encoder and config must agree") {
    const auto enc = make_reference_encoder(0, 8, 14, 336);
    CHECK(code_of([&] { tokenize_image(synthetic_image(10, 10, 0), *enc, ProjectionMap::identity(4), c); }) ==
          ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("first low token agrees with an independent derivation") {
  // Double-precision resize, normalization, and patch dot product, compared
  // against the float pipeline.
  const PipelineConfig c = load_config_file(testing::data_dir() / "golden_config.json");
  const ImageBuffer img = testing::golden_fixture();
  const TokenSequence seq = Pipeline(c).run(img).sequence;

  const auto resized = testing::bilinear_oracle(img, 336, 336);
  const std::uint32_t p = c.patch_size;
  const std::uint32_t k_total = 3 * p * p;
  const float scale = static_cast<float>(1.0 / std::sqrt(double(k_total)));
  for (std::uint32_t j = 0; j < c.encoder_dim; ++j) {
    double acc = 0;
    for (std::uint32_t ch = 0; ch < 3; ++ch)
      for (std::uint32_t y = 0; y < p; ++y)
        for (std::uint32_t x = 0; x < p; ++x) {
          const double px = resized[(std::size_t{y} * 336 + x) * 3 + ch];
          const double v = (px / 255.0 - c.mean[ch]) / c.std[ch];
          const std::uint32_t k = (ch * p + y) * p + x;
          acc += v * counter_uniform(c.seed, rng_stream::kEncoderWeights, std::uint64_t{j} * k_total + k, scale);
        }
    CHECK(seq.vector(0)[j] == doctest::Approx(acc).epsilon(1e-4));
  }
}

TEST_CASE("golden token file is reproduced bit for bit") {
  const PipelineConfig c = load_config_file(testing::data_dir() / "golden_config.json");
  const ImageBuffer img = load_image(testing::data_dir() / "fixture_64.dfim");
  CHECK(img == testing::golden_fixture());
  const TokenSequence seq = Pipeline(c).run(img).sequence;
  CHECK(seq == read_token_file(testing::data_dir() / "golden_64_seed7.dftk"));
}

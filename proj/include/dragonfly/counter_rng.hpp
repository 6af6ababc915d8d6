#pragma once

#include <cstdint>

namespace dragonfly {

/// Stateless counter-based generator used for all seeded weights.
///
///   key   = seed ^ (stream * 0xD1B54A32D192ED03)
///   x     = key + (index + 1) * 0x9E3779B97F4A7C15      (mod 2^64)
///   x    ^= x >> 30; x *= 0xBF58476D1CE4E5B9
///   x    ^= x >> 27; x *= 0x94D049BB133111EB
///   x    ^= x >> 31
///
/// The mixing steps are the SplitMix64 finalizer. A value depends only on
/// (seed, stream, index), so weights can be regenerated in any order.
constexpr std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  std::uint64_t x = (seed ^ (stream * 0xD1B54A32D192ED03ull)) + (index + 1) * 0x9E3779B97F4A7C15ull;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

/// Uniform in [-scale, scale): the top 24 bits give u in [0, 1), and the
/// result is scale * (2u - 1), computed in float.
constexpr float counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, float scale) noexcept {
  const auto top = static_cast<std::uint32_t>(counter_u64(seed, stream, index) >> 40);
  const float u = static_cast<float>(top) * (1.0f / 16777216.0f);
  return scale * (2.0f * u - 1.0f);
}

namespace rng_stream {
inline constexpr std::uint64_t kEncoderWeights = 1;
inline constexpr std::uint64_t kProjectionWeights = 2;
}  // namespace rng_stream

}  // namespace dragonfly

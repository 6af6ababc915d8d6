#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dragonfly/imaging.hpp"

namespace dragonfly {

/// A (columns, rows) tiling: the image is resized to cols*R x rows*R and cut
/// into R x R crops.
struct GridSpec {
  std::uint32_t cols = 1;
  std::uint32_t rows = 1;

  std::uint32_t crop_count() const noexcept { return cols * rows; }
  GridSpec transposed() const noexcept { return {rows, cols}; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class SeparatorPolicy {
  BetweenAll,        // one separator between every pair of consecutive segments
  BetweenCropsOnly,  // only between medium/high crops; low flows straight into them
  None,
};

std::string_view to_string(SeparatorPolicy policy) noexcept;
/// Throws ConfigError on an unknown name.
SeparatorPolicy parse_separator_policy(std::string_view name);

// CLIP ViT-L/14 preprocessing constants.
inline constexpr ChannelStats kClipMean = {0.48145466f, 0.4578275f, 0.40821073f};
inline constexpr ChannelStats kClipStd = {0.26862954f, 0.26130258f, 0.27577711f};

struct PipelineConfig {
  std::uint32_t resolution = 336;
  std::uint32_t patch_size = 14;
  /// An empty set disables that tier.
  std::vector<GridSpec> medium_grids = {{2, 2}, {1, 4}, {4, 1}};
  std::vector<GridSpec> high_grids = {{6, 6}, {3, 12}, {12, 3}};
  std::uint32_t pool_stride = 4;
  std::uint32_t encoder_dim = 64;
  std::uint32_t projection_dim = 128;
  ChannelStats mean = kClipMean;
  ChannelStats std = kClipStd;
  SeparatorPolicy separator_policy = SeparatorPolicy::BetweenAll;
  /// Every separator vector is filled with this constant.
  float separator_value = 0.0f;
  /// Seed of the reference encoder and seeded projection.
  std::uint64_t seed = 0;
  /// "seeded", "identity", or a path to a DFPJ weight file.
  std::string projection = "seeded";

  /// Side of the unpooled token grid, R / patch_size.
  std::uint32_t token_grid_side() const noexcept { return resolution / patch_size; }
  /// Side of a pooled crop grid.
  std::uint32_t pooled_grid_side() const noexcept { return token_grid_side() / pool_stride; }
  /// Crops per tier; 0 when the tier is disabled.
  std::uint32_t medium_crop_count() const noexcept;
  std::uint32_t high_crop_count() const noexcept;

  /// Throws IndivisibleGrid when the token grid is not divisible by the
  /// stride, ConfigError for any other violated invariant.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

}  // namespace dragonfly

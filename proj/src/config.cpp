#include "dragonfly/config.hpp"

#include <cmath>
#include <string>

#include "dragonfly/error.hpp"

namespace dragonfly {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void validate_grid_set(const std::vector<GridSpec>& grids, const char* tier) {
  if (grids.empty()) return;
  const std::uint32_t count = grids.front().crop_count();
  for (const auto& g : grids) {
    if (g.cols == 0 || g.rows == 0) config_error(std::string(tier) + " grid with zero side");
    if (g.cols > 0xFFFF || g.rows > 0xFFFF || g.crop_count() > 0xFFFF) {
      config_error(std::string(tier) + " grid too large");
    }
    if (g.crop_count() != count) config_error(std::string(tier) + " grids must all yield the same crop count");
  }
}

}  // namespace

std::string_view to_string(SeparatorPolicy policy) noexcept {
  switch (policy) {
    case SeparatorPolicy::BetweenAll: return "between_all";
    case SeparatorPolicy::BetweenCropsOnly: return "between_crops_only";
    case SeparatorPolicy::None: return "none";
  }
  return "between_all";
}

SeparatorPolicy parse_separator_policy(std::string_view name) {
  if (name == "between_all") return SeparatorPolicy::BetweenAll;
  if (name == "between_crops_only") return SeparatorPolicy::BetweenCropsOnly;
  if (name == "none") return SeparatorPolicy::None;
  config_error("unknown separator policy '" + std::string(name) + "'");
}

std::uint32_t PipelineConfig::medium_crop_count() const noexcept {
  return medium_grids.empty() ? 0 : medium_grids.front().crop_count();
}

std::uint32_t PipelineConfig::high_crop_count() const noexcept {
  return high_grids.empty() ? 0 : high_grids.front().crop_count();
}

void PipelineConfig::validate() const {
  if (resolution == 0) config_error("resolution must be positive");
  if (patch_size == 0 || resolution % patch_size != 0) {
    config_error("resolution " + std::to_string(resolution) + " not divisible by patch size " +
                 std::to_string(patch_size));
  }
  // Token file stores grid coordinates as u8.
  if (token_grid_side() > 256) config_error("token grid side exceeds 256");
  if (pool_stride == 0) config_error("pool stride must be positive");
  if (token_grid_side() % pool_stride != 0) {
    throw Error(ErrorCode::IndivisibleGrid, "token grid side " + std::to_string(token_grid_side()) +
                                                " not divisible by stride " + std::to_string(pool_stride));
  }
  if (encoder_dim == 0 || projection_dim == 0) config_error("encoder and projection dims must be positive");
  validate_grid_set(medium_grids, "medium");
  validate_grid_set(high_grids, "high");
  for (const auto* set : {&medium_grids, &high_grids}) {
    for (const auto& g : *set) {
      if (std::uint64_t{g.cols} * resolution > (1u << 20) || std::uint64_t{g.rows} * resolution > (1u << 20)) {
        config_error("grid target exceeds 2^20 pixels per side");
      }
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (!std::isfinite(mean[c]) || !std::isfinite(std[c]) || std[c] == 0.0f) {
      config_error("normalization mean/std must be finite with nonzero std");
    }
  }
  if (!std::isfinite(separator_value)) config_error("separator value must be finite");
  if (projection.empty()) config_error("projection must be 'seeded', 'identity', or a file path");
  if (projection == "identity" && encoder_dim != projection_dim) {
    config_error("identity projection requires encoder_dim == projection_dim");
  }
}

}  // namespace dragonfly

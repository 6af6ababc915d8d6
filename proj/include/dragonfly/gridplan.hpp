#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dragonfly/config.hpp"
#include "dragonfly/imaging.hpp"

namespace dragonfly {

struct Dims {
  std::uint32_t w = 0;
  std::uint32_t h = 0;

  std::uint32_t longest() const noexcept { return w > h ? w : h; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// One resized tier: the chosen grid, the resize target, and its crops in
/// row-major order.
struct TierPlan {
  GridSpec grid;
  Dims target;
  std::vector<CropRect> rects;
};

struct CropPlan {
  Dims native;
  Dims low_target;
  std::optional<TierPlan> medium;  // empty when the tier is disabled
  std::optional<TierPlan> high;
};

/// Picks the grid whose aspect ratio is closest to w:h in log space,
/// i.e. argmin |ln(w/h) - ln(cols/rows)|. Ties go to the most square grid
/// (smallest |cols - rows|), then to the larger cols.
///
/// The comparison is carried out exactly on integers, so the choice does not
/// depend on floating-point rounding and is symmetric under transposition.
GridSpec select_grid(std::uint32_t w, std::uint32_t h, std::span<const GridSpec> grids);

/// Row-major R x R tiles covering a grid of cols x rows.
std::vector<CropRect> grid_rects(GridSpec grid, std::uint32_t resolution);

CropPlan plan_crops(std::uint32_t w, std::uint32_t h, const PipelineConfig& config);

/// Longest side of the high target over the longest native side. Falls back
/// to the medium target, then the low target, when tiers are disabled.
double zoom_ratio(const CropPlan& plan);
double zoom_ratio(Dims native, Dims target);

}  // namespace dragonfly

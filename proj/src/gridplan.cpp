#include "dragonfly/gridplan.hpp"

#include <cstdlib>
#include <string>

#include "dragonfly/error.hpp"

namespace dragonfly {

namespace {

using u128 = unsigned __int128;

// |ln(w/h) - ln(cols/rows)| == ln(hi/lo) where {hi, lo} = {w*rows, h*cols}.
struct AspectDistance {
  std::uint64_t hi;
  std::uint64_t lo;
};

AspectDistance aspect_distance(std::uint32_t w, std::uint32_t h, GridSpec g) {
  const std::uint64_t a = std::uint64_t{w} * g.rows;
  const std::uint64_t b = std::uint64_t{h} * g.cols;
  return a >= b ? AspectDistance{a, b} : AspectDistance{b, a};
}

// Three-way comparison of hi1/lo1 against hi2/lo2.
int compare(const AspectDistance& x, const AspectDistance& y) {
  const u128 lhs = u128{x.hi} * y.lo;
  const u128 rhs = u128{y.hi} * x.lo;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

std::uint32_t squareness(GridSpec g) { return g.cols > g.rows ? g.cols - g.rows : g.rows - g.cols; }

std::optional<TierPlan> plan_tier(const PipelineConfig& config, std::span<const GridSpec> grids,
                                  std::uint32_t w, std::uint32_t h) {
  if (grids.empty()) return std::nullopt;
  TierPlan tier;
  tier.grid = select_grid(w, h, grids);
  tier.target = {tier.grid.cols * config.resolution, tier.grid.rows * config.resolution};
  tier.rects = grid_rects(tier.grid, config.resolution);
  return tier;
}

}  // namespace

GridSpec select_grid(std::uint32_t w, std::uint32_t h, std::span<const GridSpec> grids) {
  if (grids.empty()) throw Error(ErrorCode::EmptyGridSet, "no grids to choose from");
  if (w == 0 || h == 0) throw Error(ErrorCode::InvalidDimension, "image dims must be >= 1");

  GridSpec best = grids.front();
  AspectDistance best_dist = aspect_distance(w, h, best);
  for (const GridSpec& g : grids.subspan(1)) {
    const AspectDistance d = aspect_distance(w, h, g);
    const int cmp = compare(d, best_dist);
    bool take = cmp < 0;
    if (cmp == 0) {
      const auto sq = squareness(g);
      const auto best_sq = squareness(best);
      take = sq < best_sq || (sq == best_sq && g.cols > best.cols);
    }
    if (take) {
      best = g;
      best_dist = d;
    }
  }
  return best;
}

std::vector<CropRect> grid_rects(GridSpec grid, std::uint32_t resolution) {
  std::vector<CropRect> rects;
  rects.reserve(grid.crop_count());
  for (std::uint32_t r = 0; r < grid.rows; ++r) {
    for (std::uint32_t c = 0; c < grid.cols; ++c) {
      rects.push_back({c * resolution, r * resolution, resolution, resolution});
    }
  }
  return rects;
}

CropPlan plan_crops(std::uint32_t w, std::uint32_t h, const PipelineConfig& config) {
  if (w == 0 || h == 0) {
    throw Error(ErrorCode::InvalidDimension, "image dims must be >= 1, got " + std::to_string(w) + "x" + std::to_string(h));
  }
  CropPlan plan;
  plan.native = {w, h};
  plan.low_target = {config.resolution, config.resolution};
  plan.medium = plan_tier(config, config.medium_grids, w, h);
  plan.high = plan_tier(config, config.high_grids, w, h);
  return plan;
}

double zoom_ratio(Dims native, Dims target) {
  return static_cast<double>(target.longest()) / static_cast<double>(native.longest());
}

double zoom_ratio(const CropPlan& plan) {
  const Dims target = plan.high ? plan.high->target : plan.medium ? plan.medium->target : plan.low_target;
  return zoom_ratio(plan.native, target);
}

}  // namespace dragonfly

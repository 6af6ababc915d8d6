#include "dragonfly/aggregator.hpp"

#include <algorithm>
#include <string>

#include "dragonfly/error.hpp"

namespace dragonfly {

namespace {

[[noreturn]] void dim_mismatch(const std::string& msg) { throw Error(ErrorCode::DimMismatch, msg); }

std::string shape(const TokenGrid& g) {
  return std::to_string(g.rows) + "x" + std::to_string(g.cols) + "x" + std::to_string(g.dim);
}

void check_grid(const TokenGrid& g, std::uint32_t side, std::uint32_t dim, const char* what) {
  if (g.rows != side || g.cols != side || g.dim != dim || g.data.size() != g.token_count() * g.dim) {
    dim_mismatch(std::string(what) + " grid is " + shape(g) + ", expected " + std::to_string(side) + "x" +
                 std::to_string(side) + "x" + std::to_string(dim));
  }
}

// Segments are separated according to policy; `index` is the segment's
// position in low -> medium -> high order.
bool separator_before(SeparatorPolicy policy, std::size_t index) {
  switch (policy) {
    case SeparatorPolicy::BetweenAll: return index > 0;
    case SeparatorPolicy::BetweenCropsOnly: return index > 1;
    case SeparatorPolicy::None: return false;
  }
  return false;
}

}  // namespace

std::string_view to_string(SegmentKind kind) noexcept {
  switch (kind) {
    case SegmentKind::Low: return "low";
    case SegmentKind::Medium: return "medium";
    case SegmentKind::High: return "high";
  }
  return "low";
}

std::size_t TokenSequence::image_token_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const SequenceEntry& e) { return e.tag == EntryTag::Image; }));
}

std::size_t TokenSequence::separator_count() const noexcept { return entries.size() - image_token_count(); }

TokenGrid mean_pool(const TokenGrid& grid, std::uint32_t stride) {
  if (stride == 0 || grid.rows % stride != 0 || grid.cols % stride != 0) {
    throw Error(ErrorCode::IndivisibleGrid,
                "grid " + shape(grid) + " not divisible by stride " + std::to_string(stride));
  }
  const std::uint32_t out_rows = grid.rows / stride;
  const std::uint32_t out_cols = grid.cols / stride;
  const double count = static_cast<double>(stride) * stride;
  TokenGrid out(out_rows, out_cols, grid.dim);
  std::vector<double> acc(grid.dim);
  for (std::uint32_t r = 0; r < out_rows; ++r) {
    for (std::uint32_t c = 0; c < out_cols; ++c) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::uint32_t dr = 0; dr < stride; ++dr) {
        for (std::uint32_t dc = 0; dc < stride; ++dc) {
          auto v = grid.token(r * stride + dr, c * stride + dc);
          for (std::uint32_t d = 0; d < grid.dim; ++d) acc[d] += v[d];
        }
      }
      auto t = out.token(r, c);
      for (std::uint32_t d = 0; d < grid.dim; ++d) t[d] = static_cast<float>(acc[d] / count);
    }
  }
  return out;
}

std::uint64_t separator_count(SeparatorPolicy policy, std::uint64_t medium_crops, std::uint64_t high_crops) {
  const std::uint64_t crops = medium_crops + high_crops;
  switch (policy) {
    case SeparatorPolicy::BetweenAll: return crops;  // crops + 1 segments
    case SeparatorPolicy::BetweenCropsOnly: return crops > 0 ? crops - 1 : 0;
    case SeparatorPolicy::None: return 0;
  }
  return 0;
}

TokenBudget token_budget(const PipelineConfig& config) {
  config.validate();
  const std::uint64_t side = config.token_grid_side();
  const std::uint64_t pooled = config.pooled_grid_side();
  TokenBudget b;
  b.low = side * side;
  b.medium = std::uint64_t{config.medium_crop_count()} * pooled * pooled;
  b.high = std::uint64_t{config.high_crop_count()} * pooled * pooled;
  b.total = b.low + b.medium + b.high;
  b.separators = separator_count(config.separator_policy, config.medium_crop_count(), config.high_crop_count());
  return b;
}

TokenSequence assemble_sequence(const TokenGrid& low, std::span<const TokenGrid> medium,
                                std::span<const TokenGrid> high, const PipelineConfig& config) {
  if (medium.size() != config.medium_crop_count()) {
    throw Error(ErrorCode::SegmentCountMismatch, "expected " + std::to_string(config.medium_crop_count()) +
                                                     " medium grids, got " + std::to_string(medium.size()));
  }
  if (high.size() != config.high_crop_count()) {
    throw Error(ErrorCode::SegmentCountMismatch, "expected " + std::to_string(config.high_crop_count()) +
                                                     " high grids, got " + std::to_string(high.size()));
  }
  const std::uint32_t dim = config.projection_dim;
  check_grid(low, config.token_grid_side(), dim, "low");
  for (const auto& g : medium) check_grid(g, config.pooled_grid_side(), dim, "medium");
  for (const auto& g : high) check_grid(g, config.pooled_grid_side(), dim, "high");

  struct Part {
    SegmentKind kind;
    std::uint16_t crop_index;
    const TokenGrid* grid;
  };
  std::vector<Part> parts;
  parts.reserve(1 + medium.size() + high.size());
  parts.push_back({SegmentKind::Low, 0, &low});
  for (std::size_t i = 0; i < medium.size(); ++i) {
    parts.push_back({SegmentKind::Medium, static_cast<std::uint16_t>(i), &medium[i]});
  }
  for (std::size_t i = 0; i < high.size(); ++i) {
    parts.push_back({SegmentKind::High, static_cast<std::uint16_t>(i), &high[i]});
  }

  TokenSequence seq;
  seq.dim = dim;
  std::size_t n_entries = 0;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    n_entries += parts[s].grid->token_count() + (separator_before(config.separator_policy, s) ? 1 : 0);
  }
  seq.entries.reserve(n_entries);
  seq.tokens.reserve(n_entries * dim);
  seq.segments.reserve(parts.size());

  for (std::size_t s = 0; s < parts.size(); ++s) {
    const Part& part = parts[s];
    if (separator_before(config.separator_policy, s)) {
      seq.entries.push_back({EntryTag::Separator, SegmentKind::Low, 0, 0, 0, SequenceEntry::kNoSegment});
      seq.tokens.insert(seq.tokens.end(), dim, config.separator_value);
    }
    const TokenGrid& g = *part.grid;
    for (std::uint32_t r = 0; r < g.rows; ++r) {
      for (std::uint32_t c = 0; c < g.cols; ++c) {
        seq.entries.push_back({EntryTag::Image, part.kind, part.crop_index, static_cast<std::uint8_t>(r),
                               static_cast<std::uint8_t>(c), static_cast<std::uint32_t>(s)});
        auto v = g.token(r, c);
        seq.tokens.insert(seq.tokens.end(), v.begin(), v.end());
      }
    }
    seq.segments.push_back({part.kind, part.crop_index, static_cast<std::uint32_t>(g.token_count())});
  }
  return seq;
}

}  // namespace dragonfly

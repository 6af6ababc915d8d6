#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dragonfly/config.hpp"
#include "dragonfly/encoder.hpp"
#include "dragonfly/gridplan.hpp"
#include "dragonfly/imaging.hpp"

namespace dragonfly {

enum class SegmentKind : std::uint8_t { Low = 0, Medium = 1, High = 2 };
enum class EntryTag : std::uint8_t { Image = 0, Separator = 1 };

std::string_view to_string(SegmentKind kind) noexcept;

/// One position of the assembled sequence. Separator entries carry zeroed
/// layout fields and `segment_id == kNoSegment`.
struct SequenceEntry {
  static constexpr std::uint32_t kNoSegment = std::numeric_limits<std::uint32_t>::max();

  EntryTag tag = EntryTag::Image;
  SegmentKind kind = SegmentKind::Low;
  std::uint16_t crop_index = 0;
  std::uint8_t grid_row = 0;
  std::uint8_t grid_col = 0;
  std::uint32_t segment_id = kNoSegment;

  friend bool operator==(const SequenceEntry&, const SequenceEntry&) = default;
};

struct Segment {
  SegmentKind kind = SegmentKind::Low;
  std::uint16_t crop_index = 0;
  std::uint32_t token_count = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Final image representation: one dim-wide vector per entry, in entry order.
struct TokenSequence {
  std::uint32_t dim = 0;
  std::vector<float> tokens;
  std::vector<SequenceEntry> entries;
  std::vector<Segment> segments;

  std::size_t size() const noexcept { return entries.size(); }
  std::size_t image_token_count() const noexcept;
  std::size_t separator_count() const noexcept;
  std::span<const float> vector(std::size_t i) const noexcept { return {tokens.data() + i * dim, dim}; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

struct TokenBudget {
  std::uint64_t low = 0;
  std::uint64_t medium = 0;
  std::uint64_t high = 0;
  std::uint64_t total = 0;
  std::uint64_t separators = 0;

  friend bool operator==(const TokenBudget&, const TokenBudget&) = default;
};

/// Mean over non-overlapping stride x stride blocks. Throws IndivisibleGrid.
TokenGrid mean_pool(const TokenGrid& grid, std::uint32_t stride);

/// Analytic token counts for a config. Throws like PipelineConfig::validate.
TokenBudget token_budget(const PipelineConfig& config);

/// Separators produced by `policy` for the given segment counts.
std::uint64_t separator_count(SeparatorPolicy policy, std::uint64_t medium_crops, std::uint64_t high_crops);

/// Flattens grids row-major into low -> medium -> high order and inserts
/// separators per the config policy. `low` is unpooled; medium and high
/// grids are pooled. Throws SegmentCountMismatch or DimMismatch.
TokenSequence assemble_sequence(const TokenGrid& low, std::span<const TokenGrid> medium,
                                std::span<const TokenGrid> high, const PipelineConfig& config);

struct TokenizeResult {
  TokenSequence sequence;
  CropPlan plan;
};

/// Full pipeline for one image: plan, resize to each tier, cut crops,
/// normalize, encode with the shared encoder, project, pool medium and high
/// crops, and assemble. `workers > 1` encodes crops concurrently; the output
/// is identical to a sequential run.
TokenizeResult tokenize_image(const ImageBuffer& img, const CropEncoder& enc, const ProjectionMap& p,
                              const PipelineConfig& config, unsigned workers = 1);

}  // namespace dragonfly

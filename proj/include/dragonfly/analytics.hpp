#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dragonfly/config.hpp"

namespace dragonfly {

/// Which planned tier the zoom ratio is measured against.
enum class ZoomBasis { High, Medium };

ZoomBasis parse_zoom_basis(std::string_view name);

struct ImageDims {
  std::string image_id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

struct ZoomRecord {
  std::string image_id;
  std::uint32_t native_w = 0;
  std::uint32_t native_h = 0;
  std::uint32_t target_w = 0;
  std::uint32_t target_h = 0;
  double ratio = 0.0;
};

/// Plans `dims` under `config` and measures its zoom ratio.
/// Throws InvalidDimension on zero sides.
ZoomRecord zoom_record(const ImageDims& dims, const PipelineConfig& config, ZoomBasis basis = ZoomBasis::High);

struct CdfPoint {
  double ratio;
  double cum_fraction;

  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

struct ZoomStats {
  std::size_t n = 0;
  std::vector<double> sorted_ratios;
  std::map<double, double> fraction_at_least;
  std::vector<CdfPoint> cdf_points;

  /// Fraction of ratios >= threshold, for any threshold.
  double at_least(double threshold) const;

  friend bool operator==(const ZoomStats&, const ZoomStats&) = default;
};

/// Mergeable partial summary: shards can be accumulated independently and
/// merged in any order.
class ZoomAccumulator {
 public:
  void add(double ratio);
  void add(const ZoomRecord& record) { add(record.ratio); }
  void merge(const ZoomAccumulator& other);

  std::size_t size() const noexcept { return ratios_.size(); }
  /// Throws EmptyCorpus when nothing was added.
  ZoomStats finish(std::span<const double> thresholds) const;

 private:
  std::vector<double> ratios_;
};

/// Throws EmptyCorpus or InvalidDimension.
ZoomStats corpus_zoom_stats(std::span<const ImageDims> records, const PipelineConfig& config,
                            std::span<const double> thresholds, ZoomBasis basis = ZoomBasis::High);

/// Stats over the union of two shards' ratios, with the union of thresholds.
ZoomStats merge_stats(const ZoomStats& a, const ZoomStats& b);

enum class CdfFormat { Csv, Json };

/// CSV: header "ratio,cum_fraction" then one row per distinct ratio.
/// JSON: array of {"ratio", "cum_fraction"} objects. Ascending by ratio.
std::string emit_cdf(const ZoomStats& stats, CdfFormat format);

/// Shortest round-trip decimal with a trailing ".0" for integral values.
std::string format_number(double v);

/// Parses "1,2,4". Throws ConfigError.
std::vector<double> parse_thresholds(std::string_view list);

/// Corpus manifest: one tab-separated record per line, either
/// `image_id  width  height` or `image_id  path`. Blank lines and lines
/// starting with '#' are skipped. Relative paths resolve against `base_dir`,
/// and their dimensions are read by decoding the image.
/// Throws FormatError on malformed lines, InvalidDimension on zero sides.
std::vector<ImageDims> parse_corpus_manifest(std::string_view text, const std::filesystem::path& base_dir);

}  // namespace dragonfly

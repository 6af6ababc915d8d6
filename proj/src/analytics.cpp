#include "dragonfly/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"

#include "dragonfly/error.hpp"
#include "dragonfly/gridplan.hpp"
#include "dragonfly/imaging.hpp"

namespace dragonfly {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_u32(std::string_view s, std::uint32_t& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ZoomBasis parse_zoom_basis(std::string_view name) {
  if (name == "high") return ZoomBasis::High;
  if (name == "medium") return ZoomBasis::Medium;
  throw Error(ErrorCode::ConfigError, "unknown zoom basis '" + std::string(name) + "'");
}

ZoomRecord zoom_record(const ImageDims& dims, const PipelineConfig& config, ZoomBasis basis) {
  const CropPlan plan = plan_crops(dims.width, dims.height, config);
  const auto& tier = basis == ZoomBasis::High ? plan.high : plan.medium;
  const Dims target = tier ? tier->target : plan.low_target;
  return {dims.image_id, dims.width, dims.height, target.w, target.h, zoom_ratio(plan.native, target)};
}

double ZoomStats::at_least(double threshold) const {
  if (n == 0) return 0.0;
  const auto it = std::lower_bound(sorted_ratios.begin(), sorted_ratios.end(), threshold);
  return static_cast<double>(sorted_ratios.end() - it) / static_cast<double>(n);
}

void ZoomAccumulator::add(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw Error(ErrorCode::InvalidDimension, "zoom ratio must be positive");
  ratios_.push_back(ratio);
}

void ZoomAccumulator::merge(const ZoomAccumulator& other) {
  ratios_.insert(ratios_.end(), other.ratios_.begin(), other.ratios_.end());
}

ZoomStats ZoomAccumulator::finish(std::span<const double> thresholds) const {
  if (ratios_.empty()) throw Error(ErrorCode::EmptyCorpus, "no records");
  ZoomStats s;
  s.n = ratios_.size();
  s.sorted_ratios = ratios_;
  std::sort(s.sorted_ratios.begin(), s.sorted_ratios.end());
  for (double t : thresholds) s.fraction_at_least[t] = s.at_least(t);

  const double n = static_cast<double>(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    // One point per distinct ratio, at its last occurrence.
    if (i + 1 < s.n && s.sorted_ratios[i + 1] == s.sorted_ratios[i]) continue;
    s.cdf_points.push_back({s.sorted_ratios[i], static_cast<double>(i + 1) / n});
  }
  return s;
}

ZoomStats corpus_zoom_stats(std::span<const ImageDims> records, const PipelineConfig& config,
                            std::span<const double> thresholds, ZoomBasis basis) {
  if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "no records");
  ZoomAccumulator acc;
  for (const auto& r : records) acc.add(zoom_record(r, config, basis));
  return acc.finish(thresholds);
}

ZoomStats merge_stats(const ZoomStats& a, const ZoomStats& b) {
  ZoomAccumulator acc;
  for (double r : a.sorted_ratios) acc.add(r);
  for (double r : b.sorted_ratios) acc.add(r);
  std::vector<double> thresholds;
  for (const auto& [t, f] : a.fraction_at_least) thresholds.push_back(t);
  for (const auto& [t, f] : b.fraction_at_least) thresholds.push_back(t);
  return acc.finish(thresholds);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string emit_cdf(const ZoomStats& stats, CdfFormat format) {
  if (format == CdfFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : stats.cdf_points) arr.push_back({{"ratio", p.ratio}, {"cum_fraction", p.cum_fraction}});
    return arr.dump(2) + "\n";
  }
  std::string out = "ratio,cum_fraction\n";
  for (const auto& p : stats.cdf_points) out += format_number(p.ratio) + "," + format_number(p.cum_fraction) + "\n";
  return out;
}

std::vector<double> parse_thresholds(std::string_view list) {
  std::vector<double> out;
  for (auto part : split(list, ',')) {
    part = trim(part);
    double v = 0.0;
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, v);
    if (part.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
      throw Error(ErrorCode::ConfigError, "bad threshold '" + std::string(part) + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ImageDims> parse_corpus_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<ImageDims> out;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const auto where = "manifest line " + std::to_string(line_no);
    if (fields.size() == 3) {
      ImageDims d{std::string(fields[0]), 0, 0};
      if (!parse_u32(fields[1], d.width) || !parse_u32(fields[2], d.height)) {
        throw Error(ErrorCode::FormatError, where + ": bad dimensions");
      }
      if (d.width == 0 || d.height == 0) throw Error(ErrorCode::InvalidDimension, where + ": zero dimension");
      out.push_back(std::move(d));
    } else if (fields.size() == 2) {
      std::filesystem::path p{std::string(fields[1])};
      if (p.is_relative()) p = base_dir / p;
      const ImageBuffer img = load_image(p);
      out.push_back({std::string(fields[0]), img.width(), img.height()});
    } else {
      throw Error(ErrorCode::FormatError, where + ": expected 2 or 3 tab-separated fields");
    }
  }
  return out;
}

}  // namespace dragonfly

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dragonfly/config.hpp"

namespace dragonfly::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // partial batch failure, or a data error (bad token file, empty corpus)
  kExitConfig = 2,
  kExitIO = 3,
};

/// Precedence: command line > config file > defaults.
struct ConfigOverrides {
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> encoder_dim;
  std::optional<std::uint32_t> proj_dim;
  std::optional<std::uint32_t> stride;
  std::optional<std::string> separator_policy;
  std::optional<std::string> projection;
};

/// Throws ConfigError (or IndivisibleGrid) for an unusable config.
PipelineConfig resolve_config(const ConfigOverrides& overrides);

struct ManifestEntry {
  std::string image_id;
  std::string input;
  std::string output;
  std::string status;  // "ok" or "failed"
  std::string error;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct RunManifest {
  std::string config_digest;
  std::vector<ManifestEntry> entries;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

struct TokenizeOptions {
  ConfigOverrides config;
  std::vector<std::filesystem::path> inputs;
  /// Optional list file: `image_id<TAB>path` per line, appended after `inputs`.
  std::optional<std::filesystem::path> list;
  std::filesystem::path out_dir = ".";
  /// Defaults to <out_dir>/manifest.json.
  std::optional<std::filesystem::path> manifest;
  unsigned workers = 1;
};

/// One DFTK file per input at <out_dir>/<image_id>.dftk. Failures are
/// recorded per image and do not stop the batch. Returns 0 when every image
/// succeeded, 1 on partial failure, 2 on config errors, 3 on IO errors.
int run_tokenize(const TokenizeOptions& opts, std::ostream& out, std::ostream& err,
                 RunManifest* manifest_out = nullptr);

struct StatsOptions {
  ConfigOverrides config;
  std::filesystem::path manifest;
  std::filesystem::path out_dir = ".";
  std::string thresholds = "1,2,4";
  std::string format = "csv";
  std::string basis = "high";
};

/// Writes <out_dir>/zoom_cdf.{csv,json} and <out_dir>/zoom_summary.tsv.
int run_stats(const StatsOptions& opts, std::ostream& out, std::ostream& err);

/// Prints header fields, counts, and the segment layout of a token file.
int run_inspect(const std::filesystem::path& token_file, std::ostream& out, std::ostream& err);

struct BenchOptions {
  ConfigOverrides config;
  std::uint32_t count = 8;
  std::uint32_t min_side = 50;
  std::uint32_t max_side = 5000;
  std::uint64_t corpus_seed = 1;
  unsigned workers = 1;
};

/// Tokenizes a synthetic corpus and reports images/s and tokens/s.
int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

/// Full command-line entry point (subcommands tokenize, stats, inspect, bench).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dragonfly::cli

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dragonfly/config.hpp"

namespace dragonfly {

/// Canonical JSON for a config: sorted keys, every field present.
///
/// Schema (all keys optional when parsing):
///   resolution, patch_size, pool_stride, encoder_dim, projection_dim: integer
///   medium_grids, high_grids: [[cols, rows], ...]
///   mean, std: [r, g, b]
///   separator_policy: "between_all" | "between_crops_only" | "none"
///   separator_value: number
///   seed: integer
///   projection: "seeded" | "identity" | path to a DFPJ file
std::string config_to_json(const PipelineConfig& config);

/// Overlays the keys present in `text` onto `base`. Unknown keys, wrong
/// types, and malformed JSON throw ConfigError. The result is not validated.
PipelineConfig parse_config_json(std::string_view text, const PipelineConfig& base = {});

/// Reads a config file; a missing or unreadable file is a ConfigError.
PipelineConfig load_config_file(const std::filesystem::path& path, const PipelineConfig& base = {});

/// Hex SHA-256 of the canonical JSON.
std::string config_digest(const PipelineConfig& config);

}  // namespace dragonfly

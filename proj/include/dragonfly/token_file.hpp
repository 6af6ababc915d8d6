#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dragonfly/aggregator.hpp"

namespace dragonfly {

inline constexpr std::uint32_t kTokenFileVersion = 1;

/// DFTK layout, little-endian:
///   "DFTK" u32 version u32 dim u32 n_entries u32 n_image_tokens u32 n_separators
///   n_entries x { u8 tag, u8 kind, u16 crop_index, u8 grid_row, u8 grid_col }
///   n_entries x dim x f32
std::vector<std::uint8_t> encode_token_file(const TokenSequence& seq);

/// Parses and validates a DFTK stream; segments and segment ids are rebuilt
/// from the entry layout. Throws FormatError.
TokenSequence decode_token_file(std::span<const std::uint8_t> bytes);

void write_token_file(const std::filesystem::path& path, const TokenSequence& seq);
TokenSequence read_token_file(const std::filesystem::path& path);

}  // namespace dragonfly

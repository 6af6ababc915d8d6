#include "dragonfly/token_file.hpp"

#include <string>

#include "byte_io.hpp"
#include "dragonfly/error.hpp"

namespace dragonfly {

namespace {

[[noreturn]] void format_error(const std::string& msg) { throw Error(ErrorCode::FormatError, msg); }

constexpr std::size_t kHeaderBytes = 4 + 5 * 4;
constexpr std::size_t kEntryBytes = 6;

}  // namespace

std::vector<std::uint8_t> encode_token_file(const TokenSequence& seq) {
  if (seq.tokens.size() != seq.entries.size() * seq.dim) format_error("token storage does not match entry count");
  const std::size_t n_image = seq.image_token_count();
  detail::ByteWriter w;
  w.bytes().reserve(kHeaderBytes + seq.entries.size() * (kEntryBytes + 4 * std::size_t{seq.dim}));
  w.put_magic("DFTK");
  w.put_u32(kTokenFileVersion);
  w.put_u32(seq.dim);
  w.put_u32(static_cast<std::uint32_t>(seq.entries.size()));
  w.put_u32(static_cast<std::uint32_t>(n_image));
  w.put_u32(static_cast<std::uint32_t>(seq.entries.size() - n_image));
  for (const auto& e : seq.entries) {
    const bool image = e.tag == EntryTag::Image;
    w.put_u8(static_cast<std::uint8_t>(e.tag));
    w.put_u8(image ? static_cast<std::uint8_t>(e.kind) : 0);
    w.put_u16(image ? e.crop_index : 0);
    w.put_u8(image ? e.grid_row : 0);
    w.put_u8(image ? e.grid_col : 0);
  }
  for (float v : seq.tokens) w.put_f32(v);
  return std::move(w.bytes());
}

TokenSequence decode_token_file(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::FormatError);
  r.expect_magic("DFTK");
  const std::uint32_t version = r.u32();
  if (version != kTokenFileVersion) format_error("unsupported version " + std::to_string(version));
  TokenSequence seq;
  seq.dim = r.u32();
  const std::uint32_t n_entries = r.u32();
  const std::uint32_t n_image = r.u32();
  const std::uint32_t n_sep = r.u32();
  if (seq.dim == 0) format_error("zero vector dimension");
  if (std::uint64_t{n_image} + n_sep != n_entries) format_error("entry counts do not add up");
  const std::uint64_t expected = std::uint64_t{n_entries} * (kEntryBytes + 4ull * seq.dim);
  if (r.remaining() != expected) {
    format_error("payload is " + std::to_string(r.remaining()) + " bytes, expected " + std::to_string(expected));
  }

  seq.entries.reserve(n_entries);
  std::uint32_t images = 0;
  for (std::uint32_t i = 0; i < n_entries; ++i) {
    SequenceEntry e;
    const std::uint8_t tag = r.u8();
    const std::uint8_t kind = r.u8();
    e.crop_index = r.u16();
    e.grid_row = r.u8();
    e.grid_col = r.u8();
    if (tag > 1) format_error("bad entry tag " + std::to_string(tag));
    if (kind > 2) format_error("bad segment kind " + std::to_string(kind));
    e.tag = static_cast<EntryTag>(tag);
    e.kind = static_cast<SegmentKind>(kind);
    if (e.tag == EntryTag::Separator) {
      seq.entries.push_back(e);
      continue;
    }
    ++images;
    // A new segment starts after a separator or when (kind, crop) changes.
    const bool continues = !seq.entries.empty() && seq.entries.back().tag == EntryTag::Image &&
                           seq.entries.back().kind == e.kind && seq.entries.back().crop_index == e.crop_index;
    if (!continues) seq.segments.push_back({e.kind, e.crop_index, 0});
    seq.segments.back().token_count++;
    e.segment_id = static_cast<std::uint32_t>(seq.segments.size() - 1);
    seq.entries.push_back(e);
  }
  if (images != n_image) format_error("header claims " + std::to_string(n_image) + " image tokens, found " +
                                      std::to_string(images));

  seq.tokens.resize(std::size_t{n_entries} * seq.dim);
  for (auto& v : seq.tokens) v = r.f32();
  return seq;
}

void write_token_file(const std::filesystem::path& path, const TokenSequence& seq) {
  detail::write_file(path, encode_token_file(seq));
}

TokenSequence read_token_file(const std::filesystem::path& path) {
  return decode_token_file(detail::read_file(path));
}

}  // namespace dragonfly

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dragonfly/imaging.hpp"

namespace dragonfly::testing {

/// PNG with 1 (gray), 3 (RGB) or 4 (RGBA) interleaved channels.
std::vector<std::uint8_t> encode_png(std::uint32_t w, std::uint32_t h, int channels,
                                     const std::vector<std::uint8_t>& pixels);
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality = 90);

/// The 64x64 fixture behind the golden token file.
ImageBuffer golden_fixture();

std::filesystem::path data_dir();

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace dragonfly::testing

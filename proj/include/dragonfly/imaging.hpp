#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dragonfly {

/// 8-bit interleaved RGB image, row-major. Immutable once constructed.
class ImageBuffer {
 public:
  static constexpr std::uint32_t kChannels = 3;

  /// Throws InvalidDimension if a side is zero or the data length is wrong.
  ImageBuffer(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data);

  /// Image filled with one color.
  static ImageBuffer filled(std::uint32_t width, std::uint32_t height,
                            std::array<std::uint8_t, 3> rgb);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t channels() const noexcept { return kChannels; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  std::uint8_t at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<std::uint8_t> data_;
};

/// Normalized float image in channel-planar (CHW) layout.
struct PixelTensor {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 3;
  std::vector<float> data;

  float at(std::uint32_t c, std::uint32_t y, std::uint32_t x) const noexcept {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

struct CropRect {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t w = 0;
  std::uint32_t h = 0;

  friend bool operator==(const CropRect&, const CropRect&) = default;
};

using ChannelStats = std::array<float, 3>;

/// Decodes PNG, JPEG, or the raw DFIM fixture format into RGB.
/// Grayscale is replicated across channels and alpha is dropped.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);
ImageBuffer load_image(const std::filesystem::path& path);

/// Raw fixture format: "DFIM", u32 width, u32 height (LE), then RGB bytes.
std::vector<std::uint8_t> encode_dfim(const ImageBuffer& img);

/// Bilinear resize with half-pixel centers and edge clamping. Arithmetic is
/// float32 and output is rounded half-to-even, so results are byte-exact
/// across platforms.
ImageBuffer resize(const ImageBuffer& img, std::uint32_t target_w, std::uint32_t target_h);

/// Exact pixel copy of `rect`. Throws OutOfBounds if it leaves the image.
ImageBuffer extract_tile(const ImageBuffer& img, const CropRect& rect);

/// out[c] = (in[c] / 255 - mean[c]) / std[c], channel-planar.
PixelTensor normalize(const ImageBuffer& img, const ChannelStats& mean, const ChannelStats& std);

/// Inverse of normalize, in the 0..255 pixel scale (not rounded).
std::vector<float> denormalize(const PixelTensor& t, const ChannelStats& mean,
                               const ChannelStats& std);

}  // namespace dragonfly

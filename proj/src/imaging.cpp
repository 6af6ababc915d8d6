#include "dragonfly/imaging.hpp"

#include <cmath>
#include <string>

#include "byte_io.hpp"
#include "dragonfly/error.hpp"

namespace dragonfly {

namespace {

std::string dims(std::uint32_t w, std::uint32_t h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

}  // namespace

ImageBuffer::ImageBuffer(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width_ == 0 || height_ == 0) {
    throw Error(ErrorCode::InvalidDimension, "image sides must be >= 1, got " + dims(width_, height_));
  }
  if (data_.size() != static_cast<std::size_t>(width_) * height_ * kChannels) {
    throw Error(ErrorCode::InvalidDimension,
                "data length " + std::to_string(data_.size()) + " does not match " + dims(width_, height_) + "x3");
  }
}

ImageBuffer ImageBuffer::filled(std::uint32_t width, std::uint32_t height, std::array<std::uint8_t, 3> rgb) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * kChannels);
  for (std::size_t i = 0; i < data.size(); i += kChannels) {
    data[i] = rgb[0];
    data[i + 1] = rgb[1];
    data[i + 2] = rgb[2];
  }
  return ImageBuffer(width, height, std::move(data));
}

std::vector<std::uint8_t> encode_dfim(const ImageBuffer& img) {
  detail::ByteWriter w;
  w.put_magic("DFIM");
  w.put_u32(img.width());
  w.put_u32(img.height());
  w.put_bytes(img.data());
  return std::move(w.bytes());
}

ImageBuffer extract_tile(const ImageBuffer& img, const CropRect& rect) {
  const std::uint64_t right = std::uint64_t{rect.x} + rect.w;
  const std::uint64_t bottom = std::uint64_t{rect.y} + rect.h;
  if (rect.w == 0 || rect.h == 0 || right > img.width() || bottom > img.height()) {
    throw Error(ErrorCode::OutOfBounds, "rect (" + std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
                                            std::to_string(rect.w) + "," + std::to_string(rect.h) +
                                            ") outside " + dims(img.width(), img.height()));
  }
  const std::size_t row_bytes = std::size_t{rect.w} * ImageBuffer::kChannels;
  std::vector<std::uint8_t> out(row_bytes * rect.h);
  auto src = img.data();
  for (std::uint32_t row = 0; row < rect.h; ++row) {
    const std::size_t offset = (std::size_t{rect.y + row} * img.width() + rect.x) * ImageBuffer::kChannels;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), row_bytes,
                out.begin() + static_cast<std::ptrdiff_t>(row * row_bytes));
  }
  return ImageBuffer(rect.w, rect.h, std::move(out));
}

PixelTensor normalize(const ImageBuffer& img, const ChannelStats& mean, const ChannelStats& std) {
  for (float s : std) {
    if (s == 0.0f || !std::isfinite(s)) throw Error(ErrorCode::InvalidNormalization, "std components must be nonzero and finite");
  }
  for (float m : mean) {
    if (!std::isfinite(m)) throw Error(ErrorCode::InvalidNormalization, "mean components must be finite");
  }

  PixelTensor t;
  t.width = img.width();
  t.height = img.height();
  t.channels = ImageBuffer::kChannels;
  const std::size_t plane = std::size_t{t.width} * t.height;
  t.data.resize(plane * t.channels);

  // Per-channel lookup: 256 possible inputs.
  std::array<std::array<float, 256>, 3> lut{};
  for (std::size_t c = 0; c < 3; ++c) {
    for (int v = 0; v < 256; ++v) lut[c][v] = (static_cast<float>(v) / 255.0f - mean[c]) / std[c];
  }
  auto src = img.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) t.data[c * plane + i] = lut[c][src[i * 3 + c]];
  }
  return t;
}

std::vector<float> denormalize(const PixelTensor& t, const ChannelStats& mean, const ChannelStats& std) {
  const std::size_t plane = std::size_t{t.width} * t.height;
  std::vector<float> out(t.data.size());
  for (std::size_t c = 0; c < t.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      out[c * plane + i] = (t.data[c * plane + i] * std[c] + mean[c]) * 255.0f;
    }
  }
  return out;
}

}  // namespace dragonfly

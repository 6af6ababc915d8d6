#include <algorithm>
#include <cmath>
#include <string>

#include "dragonfly/error.hpp"
#include "dragonfly/imaging.hpp"

namespace dragonfly {

namespace {

// Source sample positions for one axis: src = (dst + 0.5) * scale - 0.5,
// clamped to [0, src_len - 1].
struct AxisTap {
  std::uint32_t i0;
  std::uint32_t i1;
  float frac;
};

std::vector<AxisTap> axis_taps(std::uint32_t src_len, std::uint32_t dst_len) {
  std::vector<AxisTap> taps(dst_len);
  const float scale = static_cast<float>(src_len) / static_cast<float>(dst_len);
  const float max_pos = static_cast<float>(src_len - 1);
  for (std::uint32_t d = 0; d < dst_len; ++d) {
    float pos = (static_cast<float>(d) + 0.5f) * scale - 0.5f;
    pos = std::clamp(pos, 0.0f, max_pos);
    const auto i0 = static_cast<std::uint32_t>(pos);
    const std::uint32_t i1 = std::min(i0 + 1, src_len - 1);
    taps[d] = {i0, i1, pos - static_cast<float>(i0)};
  }
  return taps;
}

std::uint8_t quantize(float v) {
  // nearbyint honors the default round-half-to-even mode.
  return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0f, 255.0f));
}

}  // namespace

ImageBuffer resize(const ImageBuffer& img, std::uint32_t target_w, std::uint32_t target_h) {
  if (target_w == 0 || target_h == 0) {
    throw Error(ErrorCode::InvalidDimension,
                "resize target must be >= 1, got " + std::to_string(target_w) + "x" + std::to_string(target_h));
  }
  if (target_w == img.width() && target_h == img.height()) return img;

  const auto xs = axis_taps(img.width(), target_w);
  const auto ys = axis_taps(img.height(), target_h);
  const std::size_t src_stride = std::size_t{img.width()} * 3;
  auto src = img.data();

  std::vector<std::uint8_t> out(std::size_t{target_w} * target_h * 3);
  for (std::uint32_t y = 0; y < target_h; ++y) {
    const auto& ty = ys[y];
    const std::uint8_t* row0 = src.data() + ty.i0 * src_stride;
    const std::uint8_t* row1 = src.data() + ty.i1 * src_stride;
    const float wy1 = ty.frac;
    const float wy0 = 1.0f - wy1;
    std::uint8_t* dst = out.data() + std::size_t{y} * target_w * 3;
    for (std::uint32_t x = 0; x < target_w; ++x) {
      const auto& tx = xs[x];
      const float wx1 = tx.frac;
      const float wx0 = 1.0f - wx1;
      const std::size_t a = std::size_t{tx.i0} * 3;
      const std::size_t b = std::size_t{tx.i1} * 3;
      for (int c = 0; c < 3; ++c) {
        const float top = wx0 * static_cast<float>(row0[a + c]) + wx1 * static_cast<float>(row0[b + c]);
        const float bottom = wx0 * static_cast<float>(row1[a + c]) + wx1 * static_cast<float>(row1[b + c]);
        dst[std::size_t{x} * 3 + c] = quantize(wy0 * top + wy1 * bottom);
      }
    }
  }
  return ImageBuffer(target_w, target_h, std::move(out));
}

}  // namespace dragonfly

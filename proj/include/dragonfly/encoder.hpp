#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "dragonfly/imaging.hpp"

namespace dragonfly {

/// rows x cols grid of dim-wide token vectors, row-major.
struct TokenGrid {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;

  TokenGrid() = default;
  TokenGrid(std::uint32_t rows, std::uint32_t cols, std::uint32_t dim)
      : rows(rows), cols(cols), dim(dim), data(std::size_t{rows} * cols * dim, 0.0f) {}

  std::size_t token_count() const noexcept { return std::size_t{rows} * cols; }

  std::span<float> token(std::uint32_t r, std::uint32_t c) noexcept {
    return {data.data() + (std::size_t{r} * cols + c) * dim, dim};
  }
  std::span<const float> token(std::uint32_t r, std::uint32_t c) const noexcept {
    return {data.data() + (std::size_t{r} * cols + c) * dim, dim};
  }

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;
};

/// Turns a normalized R x R x 3 crop into an (R/patch) x (R/patch) token grid.
/// Implementations must be deterministic and safe to call concurrently.
class CropEncoder {
 public:
  virtual ~CropEncoder() = default;

  virtual std::uint32_t resolution() const noexcept = 0;
  virtual std::uint32_t patch_size() const noexcept = 0;
  virtual std::uint32_t dim() const noexcept = 0;

  std::uint32_t grid_side() const noexcept { return resolution() / patch_size(); }

  /// Called by encode_crop after shape checks.
  virtual TokenGrid encode(const PixelTensor& crop) const = 0;
};

/// Linear patch embedding with seeded weights and no bias.
///
/// Each patch is flattened channel-major, k = (c * patch + py) * patch + px,
/// and token[j] = sum_k W(j, k) * x[k] where
/// W(j, k) = counter_uniform(seed, kEncoderWeights, j * K + k, 1 / sqrt(K))
/// and K = 3 * patch^2.
class ReferenceEncoder final : public CropEncoder {
 public:
  ReferenceEncoder(std::uint64_t seed, std::uint32_t dim, std::uint32_t patch_size, std::uint32_t resolution);

  std::uint32_t resolution() const noexcept override { return resolution_; }
  std::uint32_t patch_size() const noexcept override { return patch_size_; }
  std::uint32_t dim() const noexcept override { return dim_; }
  TokenGrid encode(const PixelTensor& crop) const override;

  std::uint32_t patch_values() const noexcept { return 3 * patch_size_ * patch_size_; }
  /// W(j, k).
  float weight(std::uint32_t j, std::uint32_t k) const noexcept {
    return weights_t_[std::size_t{k} * dim_ + j];
  }

 private:
  std::uint32_t resolution_;
  std::uint32_t patch_size_;
  std::uint32_t dim_;
  std::vector<float> weights_t_;  // K x dim
};

/// Throws InvalidPatchSize when the patch does not divide the resolution.
std::unique_ptr<ReferenceEncoder> make_reference_encoder(std::uint64_t seed, std::uint32_t dim,
                                                         std::uint32_t patch_size,
                                                         std::uint32_t resolution = 336);

/// Throws DimensionMismatch unless the crop is R x R x 3 for this encoder.
TokenGrid encode_crop(const CropEncoder& enc, const PixelTensor& crop);

/// Affine map tokens (in_dim) -> language space (out_dim).
struct ProjectionMap {
  std::uint32_t in_dim = 0;
  std::uint32_t out_dim = 0;
  std::vector<float> weights;  // out_dim x in_dim, row-major
  std::vector<float> bias;     // out_dim

  /// Throws DimensionMismatch on inconsistent sizes or non-finite entries.
  void validate() const;

  static ProjectionMap identity(std::uint32_t dim);
  /// Weights uniform in [-0.1, 0.1) from the counter generator
  /// (stream kProjectionWeights, index o * in_dim + i); zero bias.
  static ProjectionMap seeded(std::uint64_t seed, std::uint32_t in_dim, std::uint32_t out_dim);

  friend bool operator==(const ProjectionMap&, const ProjectionMap&) = default;
};

/// DFPJ file: "DFPJ", u32 in_dim, u32 out_dim, f32 weights (row-major), f32 bias; little-endian.
std::vector<std::uint8_t> encode_projection(const ProjectionMap& p);
ProjectionMap decode_projection(std::span<const std::uint8_t> bytes);
ProjectionMap load_projection(const std::filesystem::path& path);

/// Applies weights * v + bias to every token. Throws DimensionMismatch.
TokenGrid project(const TokenGrid& tokens, const ProjectionMap& p);

}  // namespace dragonfly

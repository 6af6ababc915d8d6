#pragma once

#include <memory>

#include "dragonfly/aggregator.hpp"
#include "dragonfly/config.hpp"
#include "dragonfly/encoder.hpp"

namespace dragonfly {

/// Projection named by `config.projection`: "seeded", "identity", or a DFPJ
/// path. Throws IOError, FormatError, or DimensionMismatch when a loaded map
/// does not match the config dims.
ProjectionMap projection_for(const PipelineConfig& config);

/// A validated config with its reference encoder and projection built once.
/// Immutable; `run` may be called from several threads.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const ReferenceEncoder& encoder() const noexcept { return *encoder_; }
  const ProjectionMap& projection() const noexcept { return projection_; }

  TokenizeResult run(const ImageBuffer& img, unsigned workers = 1) const;

 private:
  PipelineConfig config_;
  std::unique_ptr<ReferenceEncoder> encoder_;
  ProjectionMap projection_;
};

/// Deterministic test pattern (smooth gradients plus hashed texture).
ImageBuffer synthetic_image(std::uint32_t width, std::uint32_t height, std::uint64_t seed);

}  // namespace dragonfly

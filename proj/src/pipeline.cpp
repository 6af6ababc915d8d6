#include <string>

#include "dragonfly/aggregator.hpp"
#include "dragonfly/counter_rng.hpp"
#include "dragonfly/error.hpp"
#include "dragonfly/pipeline.hpp"
#include "parallel.hpp"

namespace dragonfly {

namespace {

void check_components(const CropEncoder& enc, const ProjectionMap& p, const PipelineConfig& config) {
  if (enc.resolution() != config.resolution || enc.patch_size() != config.patch_size) {
    throw Error(ErrorCode::DimensionMismatch,
                "encoder expects " + std::to_string(enc.resolution()) + "px crops with " +
                    std::to_string(enc.patch_size()) + "px patches; config has " + std::to_string(config.resolution) +
                    "/" + std::to_string(config.patch_size));
  }
  if (enc.dim() != p.in_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "encoder dim " + std::to_string(enc.dim()) + " != projection in_dim " + std::to_string(p.in_dim));
  }
  if (p.out_dim != config.projection_dim) {
    throw Error(ErrorCode::DimensionMismatch, "projection out_dim " + std::to_string(p.out_dim) +
                                                  " != config projection_dim " + std::to_string(config.projection_dim));
  }
  p.validate();
}

struct CropJob {
  const ImageBuffer* source;
  CropRect rect;
  bool pooled;
};

}  // namespace

TokenizeResult tokenize_image(const ImageBuffer& img, const CropEncoder& enc, const ProjectionMap& p,
                              const PipelineConfig& config, unsigned workers) {
  config.validate();
  check_components(enc, p, config);

  TokenizeResult result;
  result.plan = plan_crops(img.width(), img.height(), config);
  const CropPlan& plan = result.plan;
  const std::uint32_t r = config.resolution;

  const ImageBuffer low = resize(img, r, r);
  std::optional<ImageBuffer> medium;
  std::optional<ImageBuffer> high;
  if (plan.medium) medium = resize(img, plan.medium->target.w, plan.medium->target.h);
  if (plan.high) high = resize(img, plan.high->target.w, plan.high->target.h);

  std::vector<CropJob> jobs;
  jobs.push_back({&low, {0, 0, r, r}, false});
  if (plan.medium) {
    for (const auto& rect : plan.medium->rects) jobs.push_back({&*medium, rect, true});
  }
  if (plan.high) {
    for (const auto& rect : plan.high->rects) jobs.push_back({&*high, rect, true});
  }

  // Results land in job order regardless of completion order.
  std::vector<TokenGrid> grids(jobs.size());
  detail::parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const CropJob& job = jobs[i];
    const PixelTensor crop = normalize(extract_tile(*job.source, job.rect), config.mean, config.std);
    TokenGrid projected = project(encode_crop(enc, crop), p);
    grids[i] = job.pooled ? mean_pool(projected, config.pool_stride) : std::move(projected);
  });

  const std::size_t n_medium = plan.medium ? plan.medium->rects.size() : 0;
  const std::span<const TokenGrid> all(grids);
  result.sequence = assemble_sequence(grids.front(), all.subspan(1, n_medium), all.subspan(1 + n_medium), config);
  return result;
}

ProjectionMap projection_for(const PipelineConfig& config) {
  if (config.projection == "seeded") {
    return ProjectionMap::seeded(config.seed, config.encoder_dim, config.projection_dim);
  }
  if (config.projection == "identity") {
    if (config.encoder_dim != config.projection_dim) {
      throw Error(ErrorCode::ConfigError, "identity projection requires encoder_dim == projection_dim");
    }
    return ProjectionMap::identity(config.encoder_dim);
  }
  ProjectionMap p = load_projection(config.projection);
  if (p.in_dim != config.encoder_dim || p.out_dim != config.projection_dim) {
    throw Error(ErrorCode::DimensionMismatch, "projection file is " + std::to_string(p.in_dim) + "->" +
                                                  std::to_string(p.out_dim) + ", config expects " +
                                                  std::to_string(config.encoder_dim) + "->" +
                                                  std::to_string(config.projection_dim));
  }
  return p;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
  encoder_ = make_reference_encoder(config_.seed, config_.encoder_dim, config_.patch_size, config_.resolution);
  projection_ = projection_for(config_);
}

TokenizeResult Pipeline::run(const ImageBuffer& img, unsigned workers) const {
  return tokenize_image(img, *encoder_, projection_, config_, workers);
}

ImageBuffer synthetic_image(std::uint32_t width, std::uint32_t height, std::uint64_t seed) {
  std::vector<std::uint8_t> data(std::size_t{width} * height * 3);
  const std::uint32_t phase = static_cast<std::uint32_t>(counter_u64(seed, 7, 0) & 0xFF);
  std::size_t i = 0;
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      const std::uint32_t texture = ((x * 2654435761u) ^ (y * 2246822519u)) >> 27;
      data[i++] = static_cast<std::uint8_t>((x * 255u / width + phase + texture) & 0xFF);
      data[i++] = static_cast<std::uint8_t>((y * 255u / height + 2 * phase) & 0xFF);
      data[i++] = static_cast<std::uint8_t>(((x + y) * 3u + texture * 4u) & 0xFF);
    }
  }
  return ImageBuffer(width, height, std::move(data));
}

}  // namespace dragonfly

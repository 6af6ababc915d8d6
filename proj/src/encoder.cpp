#include "dragonfly/encoder.hpp"

#include <cmath>
#include <string>

#include "byte_io.hpp"
#include "dragonfly/counter_rng.hpp"
#include "dragonfly/error.hpp"

namespace dragonfly {

namespace {

[[noreturn]] void mismatch(const std::string& msg) { throw Error(ErrorCode::DimensionMismatch, msg); }

}  // namespace

ReferenceEncoder::ReferenceEncoder(std::uint64_t seed, std::uint32_t dim, std::uint32_t patch_size,
                                   std::uint32_t resolution)
    : resolution_(resolution), patch_size_(patch_size), dim_(dim) {
  if (patch_size == 0 || resolution == 0 || resolution % patch_size != 0) {
    throw Error(ErrorCode::InvalidPatchSize, "patch size " + std::to_string(patch_size) +
                                                 " does not divide resolution " + std::to_string(resolution));
  }
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "encoder dim must be positive");

  const std::uint32_t k_total = patch_values();
  const auto scale = static_cast<float>(1.0 / std::sqrt(static_cast<double>(k_total)));
  weights_t_.resize(std::size_t{k_total} * dim_);
  for (std::uint32_t j = 0; j < dim_; ++j) {
    for (std::uint32_t k = 0; k < k_total; ++k) {
      weights_t_[std::size_t{k} * dim_ + j] =
          counter_uniform(seed, rng_stream::kEncoderWeights, std::uint64_t{j} * k_total + k, scale);
    }
  }
}

TokenGrid ReferenceEncoder::encode(const PixelTensor& crop) const {
  const std::uint32_t side = grid_side();
  const std::uint32_t p = patch_size_;
  const std::uint32_t k_total = patch_values();
  TokenGrid out(side, side, dim_);

  std::vector<float> patch(k_total);
  for (std::uint32_t pr = 0; pr < side; ++pr) {
    for (std::uint32_t pc = 0; pc < side; ++pc) {
      std::size_t k = 0;
      for (std::uint32_t c = 0; c < 3; ++c) {
        for (std::uint32_t py = 0; py < p; ++py) {
          const float* row = crop.data.data() + (std::size_t{c} * crop.height + pr * p + py) * crop.width + pc * p;
          for (std::uint32_t px = 0; px < p; ++px) patch[k++] = row[px];
        }
      }
      // Accumulate over k in a fixed order; the inner loop over j is
      // independent per output so it vectorizes without reassociation.
      auto token = out.token(pr, pc);
      for (std::uint32_t kk = 0; kk < k_total; ++kk) {
        const float x = patch[kk];
        const float* w = weights_t_.data() + std::size_t{kk} * dim_;
        for (std::uint32_t j = 0; j < dim_; ++j) token[j] += w[j] * x;
      }
    }
  }
  return out;
}

std::unique_ptr<ReferenceEncoder> make_reference_encoder(std::uint64_t seed, std::uint32_t dim,
                                                         std::uint32_t patch_size, std::uint32_t resolution) {
  return std::make_unique<ReferenceEncoder>(seed, dim, patch_size, resolution);
}

TokenGrid encode_crop(const CropEncoder& enc, const PixelTensor& crop) {
  const std::uint32_t r = enc.resolution();
  if (crop.width != r || crop.height != r || crop.channels != 3 ||
      crop.data.size() != std::size_t{r} * r * 3) {
    mismatch("crop is " + std::to_string(crop.width) + "x" + std::to_string(crop.height) + "x" +
             std::to_string(crop.channels) + ", encoder expects " + std::to_string(r) + "x" + std::to_string(r) + "x3");
  }
  return enc.encode(crop);
}

void ProjectionMap::validate() const {
  if (in_dim == 0 || out_dim == 0) mismatch("projection dims must be positive");
  if (weights.size() != std::size_t{in_dim} * out_dim || bias.size() != out_dim) {
    mismatch("projection storage does not match " + std::to_string(out_dim) + "x" + std::to_string(in_dim));
  }
  for (float v : weights) {
    if (!std::isfinite(v)) mismatch("projection weights must be finite");
  }
  for (float v : bias) {
    if (!std::isfinite(v)) mismatch("projection bias must be finite");
  }
}

ProjectionMap ProjectionMap::identity(std::uint32_t dim) {
  ProjectionMap p{dim, dim, std::vector<float>(std::size_t{dim} * dim, 0.0f), std::vector<float>(dim, 0.0f)};
  for (std::uint32_t i = 0; i < dim; ++i) p.weights[std::size_t{i} * dim + i] = 1.0f;
  return p;
}

ProjectionMap ProjectionMap::seeded(std::uint64_t seed, std::uint32_t in_dim, std::uint32_t out_dim) {
  ProjectionMap p{in_dim, out_dim, std::vector<float>(std::size_t{in_dim} * out_dim), std::vector<float>(out_dim, 0.0f)};
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    p.weights[i] = counter_uniform(seed, rng_stream::kProjectionWeights, i, 0.1f);
  }
  return p;
}

std::vector<std::uint8_t> encode_projection(const ProjectionMap& p) {
  p.validate();
  detail::ByteWriter w;
  w.put_magic("DFPJ");
  w.put_u32(p.in_dim);
  w.put_u32(p.out_dim);
  for (float v : p.weights) w.put_f32(v);
  for (float v : p.bias) w.put_f32(v);
  return std::move(w.bytes());
}

ProjectionMap decode_projection(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::FormatError);
  r.expect_magic("DFPJ");
  ProjectionMap p;
  p.in_dim = r.u32();
  p.out_dim = r.u32();
  const std::uint64_t n = std::uint64_t{p.in_dim} * p.out_dim;
  if (r.remaining() != (n + p.out_dim) * 4) throw Error(ErrorCode::FormatError, "DFPJ payload size mismatch");
  p.weights.resize(static_cast<std::size_t>(n));
  for (auto& v : p.weights) v = r.f32();
  p.bias.resize(p.out_dim);
  for (auto& v : p.bias) v = r.f32();
  p.validate();
  return p;
}

ProjectionMap load_projection(const std::filesystem::path& path) {
  return decode_projection(detail::read_file(path));
}

TokenGrid project(const TokenGrid& tokens, const ProjectionMap& p) {
  if (tokens.dim != p.in_dim) {
    mismatch("token dim " + std::to_string(tokens.dim) + " != projection in_dim " + std::to_string(p.in_dim));
  }
  if (p.weights.size() != std::size_t{p.in_dim} * p.out_dim || p.bias.size() != p.out_dim) {
    mismatch("malformed projection map");
  }
  TokenGrid out(tokens.rows, tokens.cols, p.out_dim);
  for (std::uint32_t r = 0; r < tokens.rows; ++r) {
    for (std::uint32_t c = 0; c < tokens.cols; ++c) {
      auto v = tokens.token(r, c);
      auto t = out.token(r, c);
      for (std::uint32_t o = 0; o < p.out_dim; ++o) {
        const float* row = p.weights.data() + std::size_t{o} * p.in_dim;
        double acc = 0.0;
        for (std::uint32_t i = 0; i < p.in_dim; ++i) acc += static_cast<double>(row[i]) * v[i];
        t[o] = static_cast<float>(acc + p.bias[o]);
      }
    }
  }
  return out;
}

}  // namespace dragonfly

#include "dragonfly/error.hpp"

namespace dragonfly {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidNormalization: return "InvalidNormalization";
    case ErrorCode::EmptyGridSet: return "EmptyGridSet";
    case ErrorCode::InvalidPatchSize: return "InvalidPatchSize";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndivisibleGrid: return "IndivisibleGrid";
    case ErrorCode::SegmentCountMismatch: return "SegmentCountMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

}  // namespace dragonfly

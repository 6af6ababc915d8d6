#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dragonfly {

enum class ErrorCode {
  DecodeError,
  InvalidDimension,
  OutOfBounds,
  InvalidNormalization,
  EmptyGridSet,
  InvalidPatchSize,
  DimensionMismatch,
  IndivisibleGrid,
  SegmentCountMismatch,
  DimMismatch,
  EmptyCorpus,
  ConfigError,
  IOError,
  FormatError,
};

/// Stable name of an error code, e.g. "IndivisibleGrid".
std::string_view error_name(ErrorCode code) noexcept;

/// Every failure raised by the library. `what()` is prefixed with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace dragonfly

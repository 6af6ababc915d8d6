#pragma once

namespace dragonfly {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dragonfly

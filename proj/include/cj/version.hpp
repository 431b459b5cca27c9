#pragma once

namespace cj {
inline constexpr const char* kVersion = "1.0.0";
}  // namespace cj

#pragma once

namespace pervasive {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "pervasive-pca";
}  // namespace pervasive

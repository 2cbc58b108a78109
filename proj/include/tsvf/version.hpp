#pragma once

namespace tsvf {

inline constexpr const char* kToolName = "tsvf";
inline constexpr const char* kVersion = "0.1.0";

} // namespace tsvf

#pragma once

namespace magtun {

inline constexpr const char* kVersion = "0.1.0";
// Bumped whenever the ratio CSV columns change.
inline constexpr int kRatioCsvSchemaVersion = 1;

}  // namespace magtun

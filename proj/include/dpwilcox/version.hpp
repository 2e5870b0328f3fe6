#pragma once

namespace dpwilcox {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the reference-cache binary layout or the RNG stream
// derivation changes; stale cache files are regenerated, never reused.
inline constexpr unsigned kCacheFormatVersion = 1;

}  // namespace dpwilcox

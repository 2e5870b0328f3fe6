#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dpwilcox/reference.hpp"

namespace dpwilcox {

// File name for a cached reference, keyed by (n, epsilon bits, c, seed,
// format version).
std::string reference_cache_filename(Eigen::Index n, double epsilon, std::int64_t c,
                                     std::uint64_t seed);

// Writes the reference into dir under its key, via a temporary file and an
// atomic rename so concurrent writers of the same key stay consistent.
void cache_reference(const ReferenceDistribution& ref, const std::string& dir);

// Loads the reference with the given key, or nullopt on a miss. A corrupt
// or stale file is reported to stderr and treated as a miss, never reused.
std::optional<ReferenceDistribution> load_reference(Eigen::Index n, double epsilon,
                                                    std::int64_t c, std::uint64_t seed,
                                                    const std::string& dir);

// Cache-backed simulate: load on hit, otherwise simulate and store. Without
// a cache_dir, simply simulates.
ReferenceDistribution load_or_simulate(Eigen::Index n, double epsilon, std::int64_t c,
                                       std::uint64_t seed,
                                       const std::optional<std::string>& cache_dir,
                                       int threads = 0);

}  // namespace dpwilcox

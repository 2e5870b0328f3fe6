#pragma once

#include <cstdint>
#include <random>

namespace dpwilcox {

// SplitMix64 output function; used for substream seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent substream seed from a master seed and up to three
// path components. Identical inputs give identical seeds on every platform,
// which keeps parallel simulations reproducible regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Fixed top-level path components so unrelated consumers of one master seed
// never share a substream.
namespace stream_tag {
inline constexpr std::uint64_t kReferenceChunk = 1;
inline constexpr std::uint64_t kStatisticNoise = 2;
inline constexpr std::uint64_t kTrial = 3;
inline constexpr std::uint64_t kSweepCell = 4;
inline constexpr std::uint64_t kTableCell = 5;
inline constexpr std::uint64_t kSubsample = 6;
inline constexpr std::uint64_t kDataset = 7;
inline constexpr std::uint64_t kReferencePool = 9;
}  // namespace stream_tag

// Seeded random stream. The engine (mt19937_64) has a standard-specified
// output sequence, and all variates are produced by explicit inverse-CDF
// transforms, so every draw is bit-reproducible across platforms.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); 53-bit resolution, never 0 or 1.
  double uniform();

  // Standard normal draw via the inverse CDF.
  double normal();

  // Zero-centered Laplace draw with the given scale via the inverse CDF.
  double laplace(double scale);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// A seed from system entropy, for runs where the caller supplied none.
std::uint64_t entropy_seed();

}  // namespace dpwilcox

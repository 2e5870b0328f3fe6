#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "dpwilcox/types.hpp"

namespace dpwilcox {

// Null standard deviation of the signed-rank statistic: sqrt(n(n+1)(2n+1)/6).
double null_sigma(Eigen::Index n);

// Hard cap on reference draw counts (about 1.6 GB of doubles).
inline constexpr std::int64_t kMaxReferenceDraws = 200'000'000;

// c sorted Monte-Carlo draws of Normal(0, null_sigma(n)^2) + Lap(2n/epsilon),
// the null distribution of the noisy statistic for a given (n, epsilon).
struct ReferenceDistribution {
  Eigen::Index n = 0;
  double epsilon = 0.0;
  std::int64_t c = 0;
  std::uint64_t seed = 0;
  Eigen::ArrayXd draws;  // sorted nondecreasing, length c
};

// Generates the reference distribution. Draws are partitioned into
// fixed-size chunks, each filled from a substream derived from (seed, chunk
// index), so the result is identical for every thread count. threads = 0
// uses the hardware concurrency.
// Throws ResourceError when c exceeds kMaxReferenceDraws.
ReferenceDistribution simulate_reference(Eigen::Index n, double epsilon, std::int64_t c,
                                         std::uint64_t seed, int threads = 0);

// Fraction of reference draws at least as extreme as w_tilde: two-sided
// counts |W_k| >= |w_tilde|, one-sided counts W_k >= w_tilde. Plain
// fraction, no smoothing.
double p_value(double w_tilde, const ReferenceDistribution& ref,
               Sidedness sidedness = Sidedness::two_sided);

struct CriticalValue {
  double alpha;
  Sidedness sidedness;
  double value;
  bool normalized;
};

// Lower empirical quantile at level 1-alpha: the order statistic at 1-based
// index ceil((1-alpha)*c) of |draws| (two-sided) or of the signed draws
// (one-sided). If normalized, divided by null_sigma(n).
CriticalValue critical_value(const ReferenceDistribution& ref, double alpha,
                             Sidedness sidedness = Sidedness::two_sided,
                             bool normalized = false);

struct PrivateTestResult {
  double w_tilde;
  double p;
  Eigen::Index n;
  double epsilon;
  std::int64_t c;
  std::uint64_t seed;
};

// End-to-end private test: noisy zero-inclusive statistic, reference
// distribution at the public row count n, p-value. The noise stream and the
// reference substreams are derived independently from seed. A precomputed
// ref with matching (n, epsilon, c) may be supplied to skip simulation.
PrivateTestResult complete_test(const PairedDataset& dataset, double epsilon,
                                std::int64_t c, std::uint64_t seed,
                                Sidedness sidedness = Sidedness::two_sided,
                                const ReferenceDistribution* ref = nullptr,
                                int threads = 0);

// The substream seed complete_test uses for its reference draws; exposed so
// callers can prebuild or cache the identical reference.
std::uint64_t reference_seed_for(std::uint64_t seed);

}  // namespace dpwilcox

#pragma once

#include <cstdint>

#include "dpwilcox/rng.hpp"
#include "dpwilcox/types.hpp"

namespace dpwilcox {

struct PrivacyParams {
  double epsilon;
};

// Throws ParameterError unless epsilon is positive and finite.
void validate(const PrivacyParams& params);

// The noisy statistic release together with the public parameters that
// produced it.
struct PrivateStatistic {
  double w_tilde;
  Eigen::Index n;
  double epsilon;
  std::uint64_t seed;
};

// Global sensitivity of the zero-inclusive signed-rank statistic: changing
// one row moves the statistic by at most 2n.
double pratt_sensitivity(Eigen::Index n);

// One zero-centered Laplace draw with the given scale, by inverse CDF.
double laplace_sample(RandomStream& rng, double scale);

// The statistic plus Laplace noise of scale 2n/epsilon.
PrivateStatistic private_pratt_statistic(const PairedDataset& dataset,
                                         const PrivacyParams& params, RandomStream& rng);

}  // namespace dpwilcox

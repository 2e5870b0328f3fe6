#include "dpwilcox/privacy.hpp"

#include <cmath>

#include "dpwilcox/errors.hpp"
#include "dpwilcox/ranks.hpp"

namespace dpwilcox {

void validate(const PrivacyParams& params) {
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw ParameterError("epsilon must be positive and finite");
  }
}

double pratt_sensitivity(Eigen::Index n) {
  if (n < 1) throw ParameterError("pratt_sensitivity: n must be >= 1");
  return 2.0 * static_cast<double>(n);
}

double laplace_sample(RandomStream& rng, double scale) { return rng.laplace(scale); }

PrivateStatistic private_pratt_statistic(const PairedDataset& dataset,
                                         const PrivacyParams& params, RandomStream& rng) {
  validate(params);
  const double w = pratt_statistic(dataset);
  const double scale = pratt_sensitivity(dataset.n()) / params.epsilon;
  return PrivateStatistic{w + laplace_sample(rng, scale), dataset.n(), params.epsilon,
                          rng.seed()};
}

}  // namespace dpwilcox

#pragma once

#include <functional>

#include "dpwilcox/ranks.hpp"
#include "dpwilcox/reference.hpp"
#include "dpwilcox/rng.hpp"
#include "dpwilcox/types.hpp"

namespace dpwilcox {

// Baseline private signed-rank test built on an analytic tail-bound
// critical value. The released statistic is the drop-zeros statistic
// normalized by the null sigma of the true nonzero-row count, plus Laplace
// noise calibrated at an assumed lower bound m on that count:
//   z_tilde = w / null_sigma(max(n_r, 1)) + Lap(2m / (null_sigma(m) * epsilon)).
// The noise scale 2m/null_sigma(m) decreases in m, so calibrating at the
// lower bound is the worst case over all datasets satisfying it.

enum class TcVariant { high_utility, high_privacy };

struct TcConfig {
  TcVariant variant = TcVariant::high_utility;
  int k = 15;                     // dummy pairs (high_privacy only)
  double gamma = 0.01;            // Laplace tail budget of the analytic bound
  bool use_simulated_cv = false;  // "+" variants
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::two_sided;
};

// Throws ParameterError unless 0 < gamma < alpha < 1 and k >= 1.
void validate(const TcConfig& config);

struct TcResult {
  double w_tilde;         // released statistic, normalized units
  double critical_value;  // normalized units
  bool reject;            // |w_tilde| > critical_value (or w_tilde >, one-sided)
  Eigen::Index assumed_n_r;
  bool differentially_private;  // false when the n_r bound is only assumed
};

// Analytic bound b + g with beta = (alpha-gamma)/(1-gamma),
// b = null_sigma(n_assumed) * normal_quantile(1-beta) and
// g = laplace_upper_tail_quantile(2n/epsilon, gamma); divided by
// null_sigma(n_assumed) when normalized. Pr[W + Lambda > b+g] < alpha when
// Pr[W > b] < beta and Pr[Lambda > g] < gamma.
double tc_analytic_critical_value(Eigen::Index n, Eigen::Index n_assumed, double epsilon,
                                  double alpha, double gamma, bool normalized);

// The drop-zeros statistic of the dataset augmented with k dummy rows above
// all finite magnitudes on each side. The 2k dummies share one midrank and
// cancel exactly, so w is unchanged while n_r grows by 2k.
WilcoxonResult wilcoxon_statistic_with_dummies(const PairedDataset& dataset, int k);

// Assumes n_r >= ceil(0.3 n) without enforcing it; not differentially
// private, flagged as such in the result.
TcResult tc_high_utility_test(const PairedDataset& dataset, double epsilon,
                              const TcConfig& config, RandomStream& rng);

// Guarantees n_r >= 2k by dummy augmentation; differentially private.
TcResult tc_high_privacy_test(const PairedDataset& dataset, double epsilon,
                              const TcConfig& config, RandomStream& rng);

// Supplies the reference distribution for a requested (n, epsilon); used by
// the "+" variants so callers can share or cache references.
using ReferenceBuilder =
    std::function<const ReferenceDistribution&(Eigen::Index n, double epsilon)>;

// Same data handling as the configured variant, but the critical value is
// the simulated quantile at the assumed n_r instead of the analytic bound.
TcResult tc_plus_test(const PairedDataset& dataset, double epsilon, const TcConfig& config,
                      const ReferenceBuilder& ref_builder, RandomStream& rng);

// The assumed lower bound on n_r for a given variant and dataset size.
Eigen::Index tc_assumed_n_r(TcVariant variant, Eigen::Index n, int k);

}  // namespace dpwilcox

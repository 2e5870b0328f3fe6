#include "dpwilcox/tc.hpp"

#include <algorithm>
#include <cmath>

#include "dpwilcox/distributions.hpp"
#include "dpwilcox/errors.hpp"

namespace dpwilcox {

namespace {

TcResult run_tc(const PairedDataset& dataset, double epsilon, const TcConfig& config,
                const ReferenceBuilder* ref_builder, RandomStream& rng) {
  validate(config);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("tc test: epsilon must be positive and finite");
  }
  const bool high_privacy = config.variant == TcVariant::high_privacy;
  const Eigen::Index m = tc_assumed_n_r(config.variant, dataset.n(), config.k);

  const WilcoxonResult stat = high_privacy
                                  ? wilcoxon_statistic_with_dummies(dataset, config.k)
                                  : wilcoxon_statistic(dataset);
  const double z = stat.w / null_sigma(std::max<Eigen::Index>(stat.n_r, 1));
  const double noise_scale = 2.0 * static_cast<double>(m) / (null_sigma(m) * epsilon);
  const double z_tilde = z + rng.laplace(noise_scale);

  double cv;
  if (ref_builder != nullptr) {
    const ReferenceDistribution& ref = (*ref_builder)(m, epsilon);
    if (ref.n != m || ref.epsilon != epsilon) {
      throw ParameterError("tc_plus_test: reference builder returned mismatched parameters");
    }
    cv = critical_value(ref, config.alpha, config.sidedness, /*normalized=*/true).value;
  } else {
    cv = tc_analytic_critical_value(m, m, epsilon, config.alpha, config.gamma,
                                    /*normalized=*/true);
  }

  const bool reject = (config.sidedness == Sidedness::two_sided)
                          ? std::abs(z_tilde) > cv
                          : z_tilde > cv;
  return TcResult{z_tilde, cv, reject, m, high_privacy};
}

}  // namespace

void validate(const TcConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ParameterError("tc config: alpha must lie strictly in (0,1)");
  }
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) {
    throw ParameterError("tc config: gamma must lie strictly in (0,1)");
  }
  if (config.gamma >= config.alpha) {
    throw ParameterError("tc config: gamma must be smaller than alpha");
  }
  if (config.k < 1) {
    throw ParameterError("tc config: k must be >= 1");
  }
}

Eigen::Index tc_assumed_n_r(TcVariant variant, Eigen::Index n, int k) {
  if (variant == TcVariant::high_privacy) return 2 * static_cast<Eigen::Index>(k);
  return static_cast<Eigen::Index>(
      std::ceil(0.3 * static_cast<double>(std::max<Eigen::Index>(n, 1))));
}

double tc_analytic_critical_value(Eigen::Index n, Eigen::Index n_assumed, double epsilon,
                                  double alpha, double gamma, bool normalized) {
  if (n_assumed < 1 || n_assumed > n) {
    throw ParameterError("tc_analytic_critical_value: require 1 <= n_assumed <= n");
  }
  if (!(alpha > 0.0 && alpha < 1.0) || !(gamma > 0.0 && gamma < 1.0) || gamma >= alpha) {
    throw ParameterError("tc_analytic_critical_value: require 0 < gamma < alpha < 1");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("tc_analytic_critical_value: epsilon must be positive and finite");
  }
  const double beta = (alpha - gamma) / (1.0 - gamma);
  const double sigma = null_sigma(n_assumed);
  const double b = sigma * normal_quantile(1.0 - beta);
  const double g =
      laplace_upper_tail_quantile(2.0 * static_cast<double>(n) / epsilon, gamma);
  const double bound = b + g;
  return normalized ? bound / sigma : bound;
}

WilcoxonResult wilcoxon_statistic_with_dummies(const PairedDataset& dataset, int k) {
  if (k < 1) throw ParameterError("wilcoxon_statistic_with_dummies: k must be >= 1");
  // The 2k dummies sit above every finite magnitude, tied with each other:
  // k positive and k negative rows share one midrank, so their signed
  // contributions cancel exactly and the real rows keep their ranks.
  const WilcoxonResult real = wilcoxon_statistic(dataset);
  return WilcoxonResult{real.w, real.n_r + 2 * static_cast<Eigen::Index>(k)};
}

TcResult tc_high_utility_test(const PairedDataset& dataset, double epsilon,
                              const TcConfig& config, RandomStream& rng) {
  TcConfig cfg = config;
  cfg.variant = TcVariant::high_utility;
  return run_tc(dataset, epsilon, cfg, nullptr, rng);
}

TcResult tc_high_privacy_test(const PairedDataset& dataset, double epsilon,
                              const TcConfig& config, RandomStream& rng) {
  TcConfig cfg = config;
  cfg.variant = TcVariant::high_privacy;
  return run_tc(dataset, epsilon, cfg, nullptr, rng);
}

TcResult tc_plus_test(const PairedDataset& dataset, double epsilon, const TcConfig& config,
                      const ReferenceBuilder& ref_builder, RandomStream& rng) {
  if (!config.use_simulated_cv) {
    throw ParameterError("tc_plus_test: config.use_simulated_cv must be set");
  }
  return run_tc(dataset, epsilon, config, &ref_builder, rng);
}

}  // namespace dpwilcox

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpwilcox/reference.hpp"
#include "dpwilcox/rng.hpp"
#include "dpwilcox/tc.hpp"
#include "dpwilcox/types.hpp"

namespace dpwilcox {

enum class TestKind {
  new_test,
  tc_high_utility,
  tc_high_privacy,
  tc_high_utility_plus,
  tc_high_privacy_plus,
  public_test,
};

std::string to_string(TestKind kind);
// Accepts "new", "tc-hu", "tc-hp", "tc-hu-plus", "tc-hp-plus", "public".
std::optional<TestKind> test_kind_from_string(const std::string& name);

struct PowerConfig {
  Eigen::Index n = 100;
  double epsilon = 1.0;  // ignored by public_test
  double effect = 1.0;
  double tie_fraction = 0.0;
  double alpha = 0.05;
  std::int64_t trials = 2000;
  std::int64_t c = 1'000'000;
  TestKind test = TestKind::new_test;
  std::uint64_t seed = 0;
  Sidedness sidedness = Sidedness::two_sided;
  int k = 15;
  double gamma = 0.01;
  int threads = 0;
};

void validate(const PowerConfig& config);

struct PowerEstimate {
  double power;
  double std_error;  // sqrt(power * (1-power) / trials)
  PowerConfig config;
};

// In-memory pool of reference distributions keyed by (n, epsilon), all with
// one draw count and substream seeds derived from one master seed, so a
// sweep reuses references across cells and trials.
class ReferenceCache {
 public:
  ReferenceCache(std::uint64_t master_seed, std::int64_t c, int threads = 0);
  const ReferenceDistribution& get(Eigen::Index n, double epsilon);
  std::int64_t c() const { return c_; }

 private:
  std::uint64_t master_seed_;
  std::int64_t c_;
  int threads_;
  std::map<std::pair<Eigen::Index, std::uint64_t>, ReferenceDistribution> pool_;
};

// Paired rows where the first floor(tie_fraction * n) rows are exact ties
// (v = u with u ~ N(0,1)) and the rest draw u ~ N(0,1), v ~ N(effect,1)
// independently.
PairedDataset generate_paired_normal(Eigen::Index n, double effect, double tie_fraction,
                                     RandomStream& rng);

// Rejection fraction of the configured test over independent trials, each
// trial on a fresh synthetic dataset with its own derived substream.
// References are reused across trials at fixed (n, epsilon, c).
PowerEstimate estimate_power(const PowerConfig& config);
PowerEstimate estimate_power(const PowerConfig& config, ReferenceCache& refs);

struct UniformityReport {
  Eigen::ArrayXd sorted_p;
  Eigen::ArrayXd uniform_quantiles;  // (i - 0.5) / trials
  double max_abs_deviation;
  double max_signed_deviation;  // max(sorted_p - quantile)
  double min_signed_deviation;  // min(sorted_p - quantile)
  double rejection_rate;        // fraction of p < alpha
  double alpha;
};

// Sorted p-values of the private test over null datasets versus uniform
// quantiles.
UniformityReport pvalue_uniformity(Eigen::Index n, double epsilon, double tie_fraction,
                                   std::int64_t trials, std::int64_t c, std::uint64_t seed,
                                   double alpha = 0.05, int threads = 0);

// One estimate per grid cell; cells share the reference pool.
std::vector<PowerEstimate> power_sweep(const std::vector<PowerConfig>& grid,
                                       ReferenceCache& refs);

// Rejection fraction of the configured test over bootstrap subsamples of
// size n_sub drawn with replacement from the dataset.
PowerEstimate subsample_power(const PairedDataset& dataset, Eigen::Index n_sub,
                              std::int64_t reps, const PowerConfig& config);

struct CriticalValueRow {
  double epsilon;
  Eigen::Index n;
  double alpha;
  double critical_value;
};

// One simulated critical value per (epsilon, n, alpha) cell, epsilon-major
// order. cache_dir, when set, persists the per-cell references on disk.
std::vector<CriticalValueRow> critical_value_table(
    const std::vector<double>& epsilons, const std::vector<Eigen::Index>& ns,
    const std::vector<double>& alphas, std::int64_t c, Sidedness sidedness, bool normalized,
    std::uint64_t seed, int threads = 0,
    const std::optional<std::string>& cache_dir = std::nullopt);

// Substream seed used for the reference of a given table cell; exposed so
// cache inspection stays reproducible.
std::uint64_t table_cell_seed(std::uint64_t master_seed, Eigen::Index n, double epsilon);

}  // namespace dpwilcox

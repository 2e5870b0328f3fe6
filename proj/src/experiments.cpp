#include "dpwilcox/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>

#include "dpwilcox/cache.hpp"
#include "dpwilcox/distributions.hpp"
#include "dpwilcox/errors.hpp"
#include "dpwilcox/privacy.hpp"
#include "dpwilcox/ranks.hpp"

namespace dpwilcox {

namespace {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count) across workers; any schedule gives the
// same results because every index owns a derived substream.
template <typename Fn>
void parallel_for_index(std::int64_t count, int threads, Fn&& fn) {
  const int nthreads = std::min<std::int64_t>(resolve_threads(threads), count);
  if (nthreads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  constexpr std::int64_t kBlock = 16;
  auto worker = [&]() {
    for (;;) {
      const std::int64_t lo = next.fetch_add(kBlock);
      if (lo >= count) return;
      const std::int64_t hi = std::min(count, lo + kBlock);
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

TcConfig tc_config_from(const PowerConfig& config, bool plus) {
  TcConfig tc;
  tc.variant = (config.test == TestKind::tc_high_privacy ||
                config.test == TestKind::tc_high_privacy_plus)
                   ? TcVariant::high_privacy
                   : TcVariant::high_utility;
  tc.k = config.k;
  tc.gamma = config.gamma;
  tc.use_simulated_cv = plus;
  tc.alpha = config.alpha;
  tc.sidedness = config.sidedness;
  return tc;
}

// Per-cell immutable context: everything a single trial needs besides its
// own substream.
struct TestContext {
  PowerConfig config;
  const ReferenceDistribution* ref = nullptr;  // new_test only
  TcConfig tc;
  double tc_cv = 0.0;  // tc variants: critical value in normalized units
};

TestContext make_context(const PowerConfig& config, ReferenceCache& refs) {
  validate(config);
  TestContext ctx;
  ctx.config = config;
  switch (config.test) {
    case TestKind::new_test:
      ctx.ref = &refs.get(config.n, config.epsilon);
      break;
    case TestKind::public_test:
      break;
    case TestKind::tc_high_utility:
    case TestKind::tc_high_privacy: {
      ctx.tc = tc_config_from(config, /*plus=*/false);
      const Eigen::Index m = tc_assumed_n_r(ctx.tc.variant, config.n, config.k);
      ctx.tc_cv = tc_analytic_critical_value(m, m, config.epsilon, config.alpha,
                                             config.gamma, /*normalized=*/true);
      break;
    }
    case TestKind::tc_high_utility_plus:
    case TestKind::tc_high_privacy_plus: {
      ctx.tc = tc_config_from(config, /*plus=*/true);
      const Eigen::Index m = tc_assumed_n_r(ctx.tc.variant, config.n, config.k);
      ctx.tc_cv = critical_value(refs.get(m, config.epsilon), config.alpha,
                                 config.sidedness, /*normalized=*/true)
                      .value;
      break;
    }
  }
  return ctx;
}

bool run_single_test(const PairedDataset& data, const TestContext& ctx, RandomStream& rng) {
  const PowerConfig& cfg = ctx.config;
  switch (cfg.test) {
    case TestKind::new_test: {
      const double w = pratt_statistic(data);
      const double b = 2.0 * static_cast<double>(data.n()) / cfg.epsilon;
      const double w_tilde = w + rng.laplace(b);
      return p_value(w_tilde, *ctx.ref, cfg.sidedness) < cfg.alpha;
    }
    case TestKind::public_test: {
      const WilcoxonResult stat = wilcoxon_statistic(data);
      const double z =
          (stat.n_r > 0) ? stat.w / null_sigma(stat.n_r) : 0.0;
      const double p = (cfg.sidedness == Sidedness::two_sided)
                           ? 2.0 * (1.0 - normal_cdf(std::abs(z)))
                           : 1.0 - normal_cdf(z);
      return p < cfg.alpha;
    }
    default: {
      const bool high_privacy = ctx.tc.variant == TcVariant::high_privacy;
      const WilcoxonResult stat = high_privacy
                                      ? wilcoxon_statistic_with_dummies(data, ctx.tc.k)
                                      : wilcoxon_statistic(data);
      const Eigen::Index m = tc_assumed_n_r(ctx.tc.variant, data.n(), ctx.tc.k);
      const double z = stat.w / null_sigma(std::max<Eigen::Index>(stat.n_r, 1));
      const double noise_scale =
          2.0 * static_cast<double>(m) / (null_sigma(m) * cfg.epsilon);
      const double z_tilde = z + rng.laplace(noise_scale);
      return (cfg.sidedness == Sidedness::two_sided) ? std::abs(z_tilde) > ctx.tc_cv
                                                     : z_tilde > ctx.tc_cv;
    }
  }
}

}  // namespace

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::new_test: return "new";
    case TestKind::tc_high_utility: return "tc-hu";
    case TestKind::tc_high_privacy: return "tc-hp";
    case TestKind::tc_high_utility_plus: return "tc-hu-plus";
    case TestKind::tc_high_privacy_plus: return "tc-hp-plus";
    case TestKind::public_test: return "public";
  }
  return "unknown";
}

std::optional<TestKind> test_kind_from_string(const std::string& name) {
  if (name == "new") return TestKind::new_test;
  if (name == "tc-hu") return TestKind::tc_high_utility;
  if (name == "tc-hp") return TestKind::tc_high_privacy;
  if (name == "tc-hu-plus") return TestKind::tc_high_utility_plus;
  if (name == "tc-hp-plus") return TestKind::tc_high_privacy_plus;
  if (name == "public") return TestKind::public_test;
  return std::nullopt;
}

void validate(const PowerConfig& config) {
  if (config.n < 1) throw ParameterError("power config: n must be >= 1");
  if (config.test != TestKind::public_test &&
      (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon))) {
    throw ParameterError("power config: epsilon must be positive and finite");
  }
  if (!(config.tie_fraction >= 0.0 && config.tie_fraction <= 1.0)) {
    throw ParameterError("power config: tie_fraction must lie in [0,1]");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ParameterError("power config: alpha must lie strictly in (0,1)");
  }
  if (config.trials < 1) throw ParameterError("power config: trials must be >= 1");
  if (config.c < 1) throw ParameterError("power config: c must be >= 1");
  if (!std::isfinite(config.effect)) {
    throw ParameterError("power config: effect must be finite");
  }
  if (config.k < 1) throw ParameterError("power config: k must be >= 1");
  if (config.test == TestKind::tc_high_utility || config.test == TestKind::tc_high_privacy ||
      config.test == TestKind::tc_high_utility_plus ||
      config.test == TestKind::tc_high_privacy_plus) {
    if (!(config.gamma > 0.0 && config.gamma < config.alpha)) {
      throw ParameterError("power config: require 0 < gamma < alpha");
    }
  }
}

ReferenceCache::ReferenceCache(std::uint64_t master_seed, std::int64_t c, int threads)
    : master_seed_(master_seed), c_(c), threads_(threads) {}

const ReferenceDistribution& ReferenceCache::get(Eigen::Index n, double epsilon) {
  const auto key = std::make_pair(n, std::bit_cast<std::uint64_t>(epsilon));
  auto it = pool_.find(key);
  if (it == pool_.end()) {
    const std::uint64_t seed = derive_seed(master_seed_, stream_tag::kReferencePool,
                                           static_cast<std::uint64_t>(n), key.second);
    it = pool_.emplace(key, simulate_reference(n, epsilon, c_, seed, threads_)).first;
  }
  return it->second;
}

PairedDataset generate_paired_normal(Eigen::Index n, double effect, double tie_fraction,
                                     RandomStream& rng) {
  if (n < 1) throw ParameterError("generate_paired_normal: n must be >= 1");
  if (!(tie_fraction >= 0.0 && tie_fraction <= 1.0)) {
    throw ParameterError("generate_paired_normal: tie_fraction must lie in [0,1]");
  }
  const Eigen::Index ties =
      static_cast<Eigen::Index>(std::floor(tie_fraction * static_cast<double>(n)));
  PairedDataset data{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    data.u[i] = rng.normal();
    data.v[i] = (i < ties) ? data.u[i] : effect + rng.normal();
  }
  return data;
}

PowerEstimate estimate_power(const PowerConfig& config) {
  ReferenceCache refs(config.seed, config.c, config.threads);
  return estimate_power(config, refs);
}

PowerEstimate estimate_power(const PowerConfig& config, ReferenceCache& refs) {
  if (refs.c() != config.c) {
    throw ParameterError("estimate_power: reference cache draw count differs from config.c");
  }
  const TestContext ctx = make_context(config, refs);
  std::atomic<std::int64_t> rejections{0};
  parallel_for_index(config.trials, config.threads, [&](std::int64_t i) {
    RandomStream rng(
        derive_seed(config.seed, stream_tag::kTrial, static_cast<std::uint64_t>(i)));
    const PairedDataset data =
        generate_paired_normal(config.n, config.effect, config.tie_fraction, rng);
    if (run_single_test(data, ctx, rng)) rejections.fetch_add(1);
  });
  const double power =
      static_cast<double>(rejections.load()) / static_cast<double>(config.trials);
  const double se = std::sqrt(power * (1.0 - power) / static_cast<double>(config.trials));
  return PowerEstimate{power, se, config};
}

UniformityReport pvalue_uniformity(Eigen::Index n, double epsilon, double tie_fraction,
                                   std::int64_t trials, std::int64_t c, std::uint64_t seed,
                                   double alpha, int threads) {
  if (trials < 1) throw ParameterError("pvalue_uniformity: trials must be >= 1");
  ReferenceCache refs(seed, c, threads);
  const ReferenceDistribution& ref = refs.get(n, epsilon);
  Eigen::ArrayXd p(trials);
  parallel_for_index(trials, threads, [&](std::int64_t i) {
    RandomStream rng(derive_seed(seed, stream_tag::kTrial, static_cast<std::uint64_t>(i)));
    const PairedDataset data = generate_paired_normal(n, 0.0, tie_fraction, rng);
    const double w = pratt_statistic(data);
    const double w_tilde = w + rng.laplace(2.0 * static_cast<double>(n) / epsilon);
    p[i] = p_value(w_tilde, ref, Sidedness::two_sided);
  });
  const double rejection_rate =
      static_cast<double>((p < alpha).count()) / static_cast<double>(trials);
  std::sort(p.data(), p.data() + trials);
  Eigen::ArrayXd q(trials);
  for (std::int64_t i = 0; i < trials; ++i) {
    q[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(trials);
  }
  const Eigen::ArrayXd dev = p - q;
  return UniformityReport{std::move(p),       std::move(q),     dev.abs().maxCoeff(),
                          dev.maxCoeff(),     dev.minCoeff(),   rejection_rate,
                          alpha};
}

std::vector<PowerEstimate> power_sweep(const std::vector<PowerConfig>& grid,
                                       ReferenceCache& refs) {
  if (grid.empty()) throw ParameterError("power_sweep: empty grid");
  std::vector<PowerEstimate> out;
  out.reserve(grid.size());
  for (const auto& cell : grid) out.push_back(estimate_power(cell, refs));
  return out;
}

PowerEstimate subsample_power(const PairedDataset& dataset, Eigen::Index n_sub,
                              std::int64_t reps, const PowerConfig& config) {
  validate(dataset);
  if (n_sub < 1) throw ParameterError("subsample_power: n_sub must be >= 1");
  if (reps < 1) throw ParameterError("subsample_power: reps must be >= 1");
  PowerConfig cfg = config;
  cfg.n = n_sub;
  cfg.trials = reps;
  ReferenceCache refs(cfg.seed, cfg.c, cfg.threads);
  const TestContext ctx = make_context(cfg, refs);
  const Eigen::Index n = dataset.n();
  std::atomic<std::int64_t> rejections{0};
  parallel_for_index(reps, cfg.threads, [&](std::int64_t i) {
    RandomStream rng(
        derive_seed(cfg.seed, stream_tag::kSubsample, static_cast<std::uint64_t>(i)));
    PairedDataset sample{Eigen::ArrayXd(n_sub), Eigen::ArrayXd(n_sub)};
    for (Eigen::Index r = 0; r < n_sub; ++r) {
      const auto idx = std::min<Eigen::Index>(
          n - 1, static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n)));
      sample.u[r] = dataset.u[idx];
      sample.v[r] = dataset.v[idx];
    }
    if (run_single_test(sample, ctx, rng)) rejections.fetch_add(1);
  });
  const double power = static_cast<double>(rejections.load()) / static_cast<double>(reps);
  const double se = std::sqrt(power * (1.0 - power) / static_cast<double>(reps));
  return PowerEstimate{power, se, cfg};
}

std::uint64_t table_cell_seed(std::uint64_t master_seed, Eigen::Index n, double epsilon) {
  return derive_seed(master_seed, stream_tag::kTableCell, static_cast<std::uint64_t>(n),
                     std::bit_cast<std::uint64_t>(epsilon));
}

std::vector<CriticalValueRow> critical_value_table(
    const std::vector<double>& epsilons, const std::vector<Eigen::Index>& ns,
    const std::vector<double>& alphas, std::int64_t c, Sidedness sidedness, bool normalized,
    std::uint64_t seed, int threads, const std::optional<std::string>& cache_dir) {
  if (epsilons.empty() || ns.empty() || alphas.empty()) {
    throw ParameterError("critical_value_table: empty grid");
  }
  std::vector<CriticalValueRow> rows;
  rows.reserve(epsilons.size() * ns.size() * alphas.size());
  for (const double epsilon : epsilons) {
    for (const Eigen::Index n : ns) {
      const std::uint64_t cell_seed = table_cell_seed(seed, n, epsilon);
      const ReferenceDistribution ref =
          load_or_simulate(n, epsilon, c, cell_seed, cache_dir, threads);
      for (const double alpha : alphas) {
        rows.push_back(
            {epsilon, n, alpha, critical_value(ref, alpha, sidedness, normalized).value});
      }
    }
  }
  return rows;
}

}  // namespace dpwilcox

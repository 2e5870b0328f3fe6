#include "dpwilcox/reference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "dpwilcox/errors.hpp"
#include "dpwilcox/privacy.hpp"
#include "dpwilcox/ranks.hpp"
#include "dpwilcox/rng.hpp"

namespace dpwilcox {

namespace {

constexpr std::int64_t kChunkSize = 1 << 16;

// Extra path component separating complete_test's reference substream from
// its statistic-noise substream.
constexpr std::uint64_t kReferenceRoot = 8;

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// j-th smallest (1-based) of the absolute values of a sorted array, without
// materializing |draws|. The sorted array splits into two sequences that are
// ascending in absolute value: the non-negative suffix and the reversed
// negative prefix; this selects across both.
double abs_order_statistic(const Eigen::ArrayXd& sorted, std::int64_t j) {
  const std::int64_t c = sorted.size();
  const double* begin = sorted.data();
  const double* first_nonneg = std::lower_bound(begin, begin + c, 0.0);
  const std::int64_t neg = first_nonneg - begin;
  const std::int64_t pos = c - neg;
  auto a = [&](std::int64_t i) -> double {  // ascending |value|, length pos
    if (i < 0) return -std::numeric_limits<double>::infinity();
    if (i >= pos) return std::numeric_limits<double>::infinity();
    return sorted[neg + i];
  };
  auto b = [&](std::int64_t i) -> double {  // ascending |value|, length neg
    if (i < 0) return -std::numeric_limits<double>::infinity();
    if (i >= neg) return std::numeric_limits<double>::infinity();
    return -sorted[neg - 1 - i];
  };
  // Take ka from a and j-ka from b such that the partition is consistent.
  std::int64_t lo = std::max<std::int64_t>(0, j - neg);
  std::int64_t hi = std::min<std::int64_t>(j, pos);
  while (lo < hi) {
    const std::int64_t ka = lo + (hi - lo) / 2;
    if (a(ka) < b(j - ka - 1)) {
      lo = ka + 1;
    } else {
      hi = ka;
    }
  }
  return std::max(a(lo - 1), b(j - lo - 1));
}

}  // namespace

double null_sigma(Eigen::Index n) {
  if (n < 1) throw ParameterError("null_sigma: n must be >= 1");
  const double nd = static_cast<double>(n);
  return std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 6.0);
}

ReferenceDistribution simulate_reference(Eigen::Index n, double epsilon, std::int64_t c,
                                         std::uint64_t seed, int threads) {
  if (n < 1) throw ParameterError("simulate_reference: n must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("simulate_reference: epsilon must be positive and finite");
  }
  if (c < 1) throw ParameterError("simulate_reference: c must be >= 1");
  if (c > kMaxReferenceDraws) {
    throw ResourceError("simulate_reference: c = " + std::to_string(c) +
                        " exceeds the configured cap of " +
                        std::to_string(kMaxReferenceDraws) + " draws");
  }

  ReferenceDistribution ref{n, epsilon, c, seed, Eigen::ArrayXd(c)};
  const double sigma = null_sigma(n);
  const double b = 2.0 * static_cast<double>(n) / epsilon;
  const std::int64_t chunks = (c + kChunkSize - 1) / kChunkSize;

  std::atomic<std::int64_t> next_chunk{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t k = next_chunk.fetch_add(1);
      if (k >= chunks) return;
      RandomStream rng(derive_seed(seed, stream_tag::kReferenceChunk,
                                   static_cast<std::uint64_t>(k)));
      const std::int64_t lo = k * kChunkSize;
      const std::int64_t hi = std::min(c, lo + kChunkSize);
      for (std::int64_t i = lo; i < hi; ++i) {
        const double z = rng.normal();
        ref.draws[i] = sigma * z + rng.laplace(b);
      }
    }
  };

  const int nthreads = std::min<std::int64_t>(resolve_threads(threads), chunks);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(ref.draws.data(), ref.draws.data() + c);
  return ref;
}

double p_value(double w_tilde, const ReferenceDistribution& ref, Sidedness sidedness) {
  const std::int64_t c = ref.c;
  const double* begin = ref.draws.data();
  const double* end = begin + c;
  if (sidedness == Sidedness::one_sided) {
    const std::int64_t at_least = end - std::lower_bound(begin, end, w_tilde);
    return static_cast<double>(at_least) / static_cast<double>(c);
  }
  const double t = std::abs(w_tilde);
  const std::int64_t upper = end - std::lower_bound(begin, end, t);
  const std::int64_t lower = std::upper_bound(begin, end, -t) - begin;
  const double p = static_cast<double>(upper + lower) / static_cast<double>(c);
  return std::min(p, 1.0);
}

CriticalValue critical_value(const ReferenceDistribution& ref, double alpha,
                             Sidedness sidedness, bool normalized) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("critical_value: alpha must lie strictly in (0,1)");
  }
  const std::int64_t c = ref.c;
  std::int64_t j = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * static_cast<double>(c)));
  j = std::clamp<std::int64_t>(j, 1, c);
  double value = (sidedness == Sidedness::two_sided) ? abs_order_statistic(ref.draws, j)
                                                     : ref.draws[j - 1];
  if (normalized) value /= null_sigma(ref.n);
  return CriticalValue{alpha, sidedness, value, normalized};
}

std::uint64_t reference_seed_for(std::uint64_t seed) {
  return derive_seed(seed, kReferenceRoot);
}

PrivateTestResult complete_test(const PairedDataset& dataset, double epsilon,
                                std::int64_t c, std::uint64_t seed, Sidedness sidedness,
                                const ReferenceDistribution* ref, int threads) {
  validate(dataset);
  const Eigen::Index n = dataset.n();
  ReferenceDistribution own;
  if (ref != nullptr) {
    if (ref->n != n || ref->epsilon != epsilon || ref->c != c) {
      throw ParameterError("complete_test: supplied reference does not match (n, epsilon, c)");
    }
  } else {
    own = simulate_reference(n, epsilon, c, reference_seed_for(seed), threads);
    ref = &own;
  }
  RandomStream noise(derive_seed(seed, stream_tag::kStatisticNoise));
  const PrivateStatistic stat = private_pratt_statistic(dataset, PrivacyParams{epsilon}, noise);
  const double p = p_value(stat.w_tilde, *ref, sidedness);
  return PrivateTestResult{stat.w_tilde, p, n, epsilon, c, seed};
}

}  // namespace dpwilcox

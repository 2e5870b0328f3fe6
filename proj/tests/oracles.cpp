#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

std::vector<double> naive_midranks(const std::vector<double>& magnitudes) {
  const std::size_t n = magnitudes.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t less = 0;
    std::size_t equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (magnitudes[j] < magnitudes[i]) ++less;
      if (magnitudes[j] == magnitudes[i]) ++equal;
    }
    ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

double naive_keep_zeros_statistic(const std::vector<double>& d, const std::vector<int>& s) {
  if (d.size() != s.size()) throw std::invalid_argument("d and s sizes differ");
  const std::vector<double> ranks = naive_midranks(d);
  double w = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) w += s[i] * ranks[i];
  return w;
}

std::map<long long, double> exact_sign_null_pmf(int n) {
  if (n < 1 || n > 24) throw std::invalid_argument("n out of range");
  std::map<long long, double> pmf;
  const double prob = std::ldexp(1.0, -n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    long long w = 0;
    for (int r = 1; r <= n; ++r) {
      w += (mask & (1u << (r - 1))) ? r : -r;
    }
    pmf[w] += prob;
  }
  return pmf;
}

double naive_abs_order_statistic(std::vector<double> values, std::int64_t j) {
  for (double& v : values) v = std::abs(v);
  std::sort(values.begin(), values.end());
  return values.at(static_cast<std::size_t>(j - 1));
}

dpwilcox::PairedDataset worked_example() {
  dpwilcox::PairedDataset data{Eigen::ArrayXd(5), Eigen::ArrayXd(5)};
  data.u << 9, 2, 3, 8, 9;
  data.v << 18, 11, 3, 10, 8;
  return data;
}

}  // namespace oracles

#include "dpwilcox/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpwilcox/errors.hpp"

namespace dpwilcox {

void validate(const PairedDataset& dataset) {
  if (dataset.u.size() != dataset.v.size()) {
    throw InputError("paired dataset: u and v lengths differ (" +
                     std::to_string(dataset.u.size()) + " vs " +
                     std::to_string(dataset.v.size()) + ")");
  }
  if (dataset.n() < 1) {
    throw InputError("paired dataset: at least one row required");
  }
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    if (!std::isfinite(dataset.u[i]) || !std::isfinite(dataset.v[i])) {
      throw InputError("paired dataset: non-finite value in row " + std::to_string(i + 1));
    }
  }
}

std::vector<SignedDifference> compute_signed_differences(const PairedDataset& dataset) {
  validate(dataset);
  std::vector<SignedDifference> out;
  out.reserve(static_cast<std::size_t>(dataset.n()));
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    const double diff = dataset.v[i] - dataset.u[i];
    const int s = (diff > 0.0) ? 1 : (diff < 0.0) ? -1 : 0;
    out.push_back({std::abs(diff), s});
  }
  return out;
}

Eigen::ArrayXd assign_midranks(const Eigen::Ref<const Eigen::ArrayXd>& magnitudes) {
  const Eigen::Index m = magnitudes.size();
  if (m == 0) {
    throw InputError("assign_midranks: empty input");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::isfinite(magnitudes[i]) || magnitudes[i] < 0.0) {
      throw InputError("assign_midranks: magnitude in row " + std::to_string(i + 1) +
                       " is negative or non-finite");
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return magnitudes[a] < magnitudes[b];
  });
  Eigen::ArrayXd ranks(m);
  Eigen::Index i = 0;
  while (i < m) {
    Eigen::Index j = i;
    while (j + 1 < m && magnitudes[order[static_cast<std::size_t>(j + 1)]] ==
                            magnitudes[order[static_cast<std::size_t>(i)]]) {
      ++j;
    }
    // 1-based positions i+1 .. j+1 share the midrank.
    const double midrank = static_cast<double>(i + j + 2) / 2.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      ranks[order[static_cast<std::size_t>(k)]] = midrank;
    }
    i = j + 1;
  }
  return ranks;
}

RankedTable rank_table(const PairedDataset& dataset, bool keep_zeros) {
  const auto diffs = compute_signed_differences(dataset);
  std::vector<RankedRow> rows;
  rows.reserve(diffs.size());
  for (const auto& sd : diffs) {
    if (keep_zeros || sd.s != 0) rows.push_back({sd.d, sd.s, 0.0});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RankedRow& a, const RankedRow& b) { return a.d < b.d; });
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j + 1 < rows.size() && rows[j + 1].d == rows[i].d) ++j;
    const double midrank = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rows[k].r = midrank;
    i = j + 1;
  }
  return RankedTable{std::move(rows), dataset.n()};
}

WilcoxonResult wilcoxon_statistic(const PairedDataset& dataset) {
  const RankedTable table = rank_table(dataset, /*keep_zeros=*/false);
  double w = 0.0;
  for (const auto& row : table.rows) w += row.s * row.r;
  return {w, static_cast<Eigen::Index>(table.rows.size())};
}

double pratt_statistic(const PairedDataset& dataset) {
  const RankedTable table = rank_table(dataset, /*keep_zeros=*/true);
  double w = 0.0;
  for (const auto& row : table.rows) w += row.s * row.r;
  return w;
}

Eigen::Index count_nonzero(const PairedDataset& dataset) {
  validate(dataset);
  return (dataset.u != dataset.v).count();
}

}  // namespace dpwilcox

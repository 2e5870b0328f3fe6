#pragma once

#include <vector>

#include <Eigen/Core>

#include "dpwilcox/types.hpp"

namespace dpwilcox {

// One row after differencing: magnitude d = |v-u|, sign s = sign(v-u),
// midrank r. s = 0 exactly when d = 0.
struct RankedRow {
  double d;
  int s;
  double r;
};

// Rows sorted by nondecreasing d with midranks assigned; ranks of every
// maximal tied group equal the mean of the integer positions it occupies.
struct RankedTable {
  std::vector<RankedRow> rows;
  Eigen::Index n;
};

struct SignedDifference {
  double d;
  int s;
};

struct WilcoxonResult {
  double w;
  Eigen::Index n_r;
};

// d_i = |v_i - u_i| and s_i = sign(v_i - u_i), in input row order.
std::vector<SignedDifference> compute_signed_differences(const PairedDataset& dataset);

// Midranks aligned with input order: every maximal group of equal
// magnitudes receives the mean of the 1-based sorted positions it occupies.
// Equality is exact floating-point comparison; no tolerance.
// Throws InputError on an empty input or a negative/non-finite magnitude.
Eigen::ArrayXd assign_midranks(const Eigen::Ref<const Eigen::ArrayXd>& magnitudes);

// Ranked rows sorted by d. keep_zeros selects between the variant that
// ranks zero-difference rows at the bottom with s = 0 and the variant that
// drops them before ranking.
RankedTable rank_table(const PairedDataset& dataset, bool keep_zeros);

// Classic statistic: zero-difference rows dropped, midranks over the n_r
// survivors, w = sum(s_i * r_i). All rows tied at zero gives {0, 0}.
WilcoxonResult wilcoxon_statistic(const PairedDataset& dataset);

// Zero-inclusive variant: no rows dropped; zero rows occupy the lowest
// ranks but contribute nothing to the sum.
double pratt_statistic(const PairedDataset& dataset);

// Number of rows with u_i != v_i.
Eigen::Index count_nonzero(const PairedDataset& dataset);

}  // namespace dpwilcox

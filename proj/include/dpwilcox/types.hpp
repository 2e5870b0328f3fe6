#pragma once

#include <Eigen/Core>

namespace dpwilcox {

enum class Sidedness { one_sided, two_sided };

// n paired real measurements (u_i, v_i); the private input.
struct PairedDataset {
  Eigen::ArrayXd u;
  Eigen::ArrayXd v;

  Eigen::Index n() const { return u.size(); }
};

// Throws InputError naming the offending row unless u and v have equal
// length, there is at least one row, and every value is finite.
void validate(const PairedDataset& dataset);

}  // namespace dpwilcox

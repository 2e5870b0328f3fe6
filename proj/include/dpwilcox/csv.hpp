#pragma once

#include <string>

#include "dpwilcox/types.hpp"

namespace dpwilcox {

struct CsvOptions {
  std::string u_column = "u";
  std::string v_column = "v";
  char delimiter = ',';
};

// Reads a UTF-8 CSV with a header row naming the two value columns. Extra
// columns are ignored. Throws InputError with the file line number for a
// missing column, a malformed or non-finite cell, or an empty body.
PairedDataset read_paired_csv(const std::string& path, const CsvOptions& options = {});

}  // namespace dpwilcox

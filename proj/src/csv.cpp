#include "dpwilcox/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "dpwilcox/errors.hpp"
#include "dpwilcox/ranks.hpp"

namespace dpwilcox {

namespace {

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view raw, std::size_t line_no, const std::string& column) {
  const std::string_view cell = trim(raw);
  if (cell.empty()) {
    throw InputError("csv line " + std::to_string(line_no) + ": column '" + column +
                     "' is empty");
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw InputError("csv line " + std::to_string(line_no) + ": column '" + column +
                     "' has non-numeric or non-finite value '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

PairedDataset read_paired_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open csv file: " + path);
  }
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw InputError("csv file is empty: " + path);
  }
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB &&
      static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_line(line, options.delimiter);
  std::ptrdiff_t u_idx = -1;
  std::ptrdiff_t v_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name{trim(header[i])};
    if (name == options.u_column) u_idx = static_cast<std::ptrdiff_t>(i);
    if (name == options.v_column) v_idx = static_cast<std::ptrdiff_t>(i);
  }
  if (u_idx < 0 || v_idx < 0) {
    throw InputError("csv header must name columns '" + options.u_column + "' and '" +
                     options.v_column + "' (got: " + line + ")");
  }

  std::vector<double> us;
  std::vector<double> vs;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, options.delimiter);
    if (static_cast<std::ptrdiff_t>(fields.size()) <= std::max(u_idx, v_idx)) {
      throw InputError("csv line " + std::to_string(line_no) + ": expected at least " +
                       std::to_string(std::max(u_idx, v_idx) + 1) + " columns, got " +
                       std::to_string(fields.size()));
    }
    us.push_back(parse_cell(fields[static_cast<std::size_t>(u_idx)], line_no, options.u_column));
    vs.push_back(parse_cell(fields[static_cast<std::size_t>(v_idx)], line_no, options.v_column));
  }
  if (us.empty()) {
    throw InputError("csv file has a header but no data rows: " + path);
  }

  PairedDataset data{Eigen::ArrayXd(static_cast<Eigen::Index>(us.size())),
                     Eigen::ArrayXd(static_cast<Eigen::Index>(vs.size()))};
  for (std::size_t i = 0; i < us.size(); ++i) {
    data.u[static_cast<Eigen::Index>(i)] = us[i];
    data.v[static_cast<Eigen::Index>(i)] = vs[i];
  }
  validate(data);
  return data;
}

}  // namespace dpwilcox

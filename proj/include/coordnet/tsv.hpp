#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coordnet {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; DataError if absent.
  std::size_t column(const std::string& name) const;
  /// Numeric column; "NA" and empty cells become NaN.
  std::vector<double> numeric(const std::string& name) const;
};

/// Tab-separated table with a header row.
Table read_tsv(std::istream& in);
Table read_tsv_file(const std::string& path);

}  // namespace coordnet

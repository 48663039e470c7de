#pragma once

#include <string>
#include <vector>

namespace lgpctrl {

/// Decimal text with 17 significant digits (round-trips every double).
std::string FormatDouble(double v);

/// Parsed comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column, or -1.
  int column(const std::string& name) const;
};

/// @throws InputError on ragged rows or non-numeric cells.
CsvTable ParseCsv(const std::string& text);

/// Joins cells with commas.
std::string CsvLine(const std::vector<std::string>& cells);
std::string CsvLine(const std::vector<double>& cells);

}  // namespace lgpctrl

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace diamonds {

/// Numeric CSV table with a header row.
class CsvTable {
 public:
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> columns;
  std::size_t rows = 0;

  bool has(const std::string& name) const { return columns.count(name) != 0; }
  /// Throws std::runtime_error when the column is missing.
  const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");

/// Fixed 12-significant-digit formatting used by every CSV writer.
std::string format_number(double x);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace diamonds

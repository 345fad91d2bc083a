#include "diamond/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace diamonds {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

const std::vector<double>& CsvTable::column(const std::string& name) const {
  auto it = columns.find(name);
  if (it == columns.end()) throw std::runtime_error("csv: missing column '" + name + "'");
  return it->second;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split(line);
      for (const auto& h : t.header) t.columns[h];
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": wrong number of fields");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[i].size() || cells[i].empty())
        throw std::runtime_error(source + ":" + std::to_string(line_no) + ": bad number '" + cells[i] + "'");
      t.columns[t.header[i]].push_back(v);
    }
    ++t.rows;
  }
  if (t.header.empty()) throw std::runtime_error(source + ": empty CSV");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_csv(in, path);
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

}  // namespace diamonds

#ifndef CVP_IO_HPP
#define CVP_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cvp/errors.hpp"

namespace cvp {

/// Full-precision decimal form of a double: 17 significant digits, enough
/// to round-trip, and a deterministic byte sequence for a given value.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes a CSV table: header row, LF line endings, UTF-8 (all content is
/// ASCII), doubles at 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& values) {
    if (values.size() != header_.size())
      throw ConfigError("CSV row width does not match header");
    std::string line;
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format_double(values[i]);
    }
    rows_.push_back(std::move(line));
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    for (size_t i = 0; i < header_.size(); ++i) {
      if (i) out << ',';
      out << header_[i];
    }
    out << '\n';
    for (const auto& r : rows_) out << r << '\n';
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

/// Reads a CSV with a header row into columns of doubles.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  int rows() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }

  int column_index(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  t.columns.resize(t.header.size());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= t.columns.size()) throw ConfigError("CSV row wider than header: " + path);
      try {
        t.columns[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("non-numeric CSV cell '" + cell + "' in " + path);
      }
      ++c;
    }
    if (c != t.columns.size()) throw ConfigError("CSV row narrower than header: " + path);
  }
  return t;
}

}  // namespace cvp

#endif  // CVP_IO_HPP

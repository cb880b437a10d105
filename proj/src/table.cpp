#include "ptcure/table.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "ptcure/errors.hpp"

namespace ptcure {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

std::size_t NumericTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw ValidationError("column '" + name + "' not found in header");
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    std::string cell = trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    out.push_back(std::move(cell));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

NumericTable read_numeric_table(std::istream& in) {
  NumericTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    if (!have_header) {
      table.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
      table.header = split_line(line, table.delimiter);
      have_header = true;
      continue;
    }
    auto cells = split_line(line, table.delimiter);
    if (cells.size() != table.header.size())
      throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                    std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string& cell = cells[j];
      if (cell.empty()) throw ParseError(line_no, "missing value in column '" + table.header[j] + "'");
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(line_no, "cannot parse '" + cell + "' in column '" + table.header[j] + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ValidationError("input is empty (no header row)");
  return table;
}

NumericTable read_numeric_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_numeric_table(in);
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace ptcure

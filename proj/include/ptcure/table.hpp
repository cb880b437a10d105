#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ptcure {

// Header plus numeric rows of a comma- or tab-delimited file. Lines starting
// with '#' and blank lines are skipped; `line_numbers[r]` is the physical line
// that row r came from.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
  char delimiter = ',';

  // Index of `name` in the header; throws ValidationError if absent.
  std::size_t column(const std::string& name) const;
};

// Accepts "Inf"/"inf"/"NaN" spellings as parsed by strtod; empty cells are a
// ParseError.
NumericTable read_numeric_table(std::istream& in);
NumericTable read_numeric_table_file(const std::string& path);

std::vector<std::string> split_line(const std::string& line, char delimiter);

// Shortest round-trippable decimal form.
std::string format_double(double value);

}  // namespace ptcure

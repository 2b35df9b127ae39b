#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace arvar {

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Header row plus numeric data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column by name, or throws CsvError(1, ...).
  std::size_t column(const std::string& name) const;
};

/// Reads a comma-separated table with a mandatory header. Blank lines are
/// skipped; every data row must have as many numeric fields as the header.
/// Throws CsvError carrying the 1-based line number.
CsvTable read_csv(std::istream& in);

}  // namespace arvar

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsc/dataset.hpp"

namespace nsc {

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Column layout of a data file. L columns may hold the missing token, X
/// columns may not. Columns not named here are ignored.
struct CsvSchema {
  std::vector<std::string> l_columns;
  std::vector<std::string> x_columns;
  std::string missing_token = "NA";
  bool empty_is_missing = true;

  /// Default names L1..LK, X1..Xp.
  static CsvSchema standard(int k, int p);
  /// Picks every column named L<n> / X<n> from a header, ordered by n.
  static CsvSchema infer(const std::vector<std::string>& header);
};

std::vector<std::string> split_csv_line(const std::string& line);

Dataset ingest_csv(std::istream& in, const CsvSchema& schema);
/// Reads the header first and infers the schema from it.
Dataset ingest_csv(std::istream& in, const std::string& missing_token = "NA", bool empty_is_missing = true);
Dataset ingest_csv_file(const std::string& path, const std::string& missing_token = "NA",
                        bool empty_is_missing = true);

/// Writes header `L1,...,LK,X1,...,Xp`; values use shortest round-trip form.
void write_csv(std::ostream& out, const Dataset& data, const std::string& missing_token = "NA");

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace nsc

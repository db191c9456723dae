#include "nsc/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <ostream>

namespace nsc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(first, last - first + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

bool parse_double(const std::string& s, double& value) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

bool numbered_column(const std::string& name, char prefix, int& number) {
  if (name.size() < 2 || name[0] != prefix) return false;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), number);
  return ec == std::errc() && ptr == name.data() + name.size() && number >= 1;
}

}  // namespace

CsvError::CsvError(const std::string& what, std::size_t line)
    : std::runtime_error("csv line " + std::to_string(line) + ": " + what), line_(line) {}

CsvSchema CsvSchema::standard(int k, int p) {
  CsvSchema schema;
  for (int i = 1; i <= k; ++i) schema.l_columns.push_back("L" + std::to_string(i));
  for (int m = 1; m <= p; ++m) schema.x_columns.push_back("X" + std::to_string(m));
  return schema;
}

CsvSchema CsvSchema::infer(const std::vector<std::string>& header) {
  std::map<int, std::string> l_cols;
  std::map<int, std::string> x_cols;
  for (const auto& name : header) {
    int number = 0;
    if (numbered_column(name, 'L', number)) l_cols.emplace(number, name);
    else if (numbered_column(name, 'X', number)) x_cols.emplace(number, name);
  }
  CsvSchema schema;
  for (const auto& [_, name] : l_cols) schema.l_columns.push_back(name);
  for (const auto& [_, name] : x_cols) schema.x_columns.push_back(name);
  return schema;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

Dataset ingest_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw CsvError("empty file", line_no);

  const auto header = split_csv_line(line);
  auto locate = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw CsvError("missing column '" + name + "'", line_no);
    return static_cast<std::size_t>(it - header.begin());
  };
  const int k = static_cast<int>(schema.l_columns.size());
  const int p = static_cast<int>(schema.x_columns.size());
  std::vector<std::size_t> l_idx;
  std::vector<std::size_t> x_idx;
  for (const auto& name : schema.l_columns) l_idx.push_back(locate(name));
  for (const auto& name : schema.x_columns) x_idx.push_back(locate(name));

  DatasetBuilder builder(k, p);
  std::vector<double> l(k);
  std::vector<double> x(p);
  std::vector<int> bits(k);
  auto is_missing = [&](const std::string& cell) {
    return cell == schema.missing_token || (schema.empty_is_missing && cell.empty());
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw CsvError("expected " + std::to_string(header.size()) + " cells, found " +
                         std::to_string(cells.size()), line_no);
    }
    for (int i = 0; i < k; ++i) {
      const auto& cell = cells[l_idx[i]];
      if (is_missing(cell)) {
        bits[i] = 0;
        l[i] = std::numeric_limits<double>::quiet_NaN();
      } else if (parse_double(cell, l[i])) {
        bits[i] = 1;
      } else {
        throw CsvError("non-numeric value '" + cell + "' in column " + schema.l_columns[i], line_no);
      }
    }
    for (int m = 0; m < p; ++m) {
      const auto& cell = cells[x_idx[m]];
      if (is_missing(cell)) {
        throw CsvError("missing value in always-observed column " + schema.x_columns[m], line_no);
      }
      if (!parse_double(cell, x[m])) {
        throw CsvError("non-numeric value '" + cell + "' in column " + schema.x_columns[m], line_no);
      }
    }
    builder.add(Pattern::encode(bits), l, x);
  }
  return std::move(builder).build();
}

Dataset ingest_csv(std::istream& in, const std::string& missing_token, bool empty_is_missing) {
  std::string line;
  std::size_t line_no = 0;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header_line = line;
      break;
    }
  }
  if (header_line.empty()) throw CsvError("empty file", line_no);
  CsvSchema schema = CsvSchema::infer(split_csv_line(header_line));
  schema.missing_token = missing_token;
  schema.empty_is_missing = empty_is_missing;
  if (schema.l_columns.size() < static_cast<std::size_t>(kMinVariables)) {
    throw CsvError("header must name at least two L columns (L1, L2, ...)", line_no);
  }
  // Re-feed the header to the schema-driven reader.
  std::string body = header_line + "\n";
  body.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  std::istringstream again(body);
  return ingest_csv(again, schema);
}

Dataset ingest_csv_file(const std::string& path, const std::string& missing_token, bool empty_is_missing) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return ingest_csv(in, missing_token, empty_is_missing);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& data, const std::string& missing_token) {
  const auto schema = CsvSchema::standard(data.k(), data.p());
  bool first = true;
  for (const auto& name : schema.l_columns) {
    out << (first ? "" : ",") << name;
    first = false;
  }
  for (const auto& name : schema.x_columns) out << "," << name;
  out << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto l = data.l(r);
    for (int i = 0; i < data.k(); ++i) {
      if (i > 0) out << ',';
      if (data.pattern(r).observed(i)) out << format_double(l[i]);
      else out << missing_token;
    }
    for (double v : data.x(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace nsc

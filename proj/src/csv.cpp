#include "hdinfer/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hdinfer {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    // trim whitespace and a possible trailing CR
    const auto a = cur.find_first_not_of(" \t\r");
    const auto b = cur.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cur.substr(a, b - a + 1));
  }
  return out;
}

double parse_number(const std::string& tok, int row, std::size_t col) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error("row " + std::to_string(row) + ", column " +
                             std::to_string(col + 1) +
                             ": not a number: '" + tok + "'");
  }
  return v;
}

}  // namespace

CsvData load_regression_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);

  std::string line;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto toks = split_row(line);
    if (lineno == 1 && opts.has_header) {
      header = toks;
      continue;
    }
    std::vector<double> row(toks.size());
    for (std::size_t c = 0; c < toks.size(); ++c) {
      row[c] = parse_number(toks[c], lineno, c);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("row " + std::to_string(lineno) +
                               ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("CSV has no data rows");
  const std::size_t ncol = rows.front().size();
  if (opts.has_header && header.size() != ncol) {
    throw std::runtime_error("header and data column counts differ");
  }
  if (ncol < 2) throw std::runtime_error("need a response and at least one predictor");

  // Resolve the response column.
  std::size_t resp = ncol;  // invalid
  if (opts.has_header) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == opts.response) {
        resp = c;
        break;
      }
    }
  }
  if (resp == ncol) {
    char* end = nullptr;
    const long idx = std::strtol(opts.response.c_str(), &end, 10);
    if (end != opts.response.c_str() && *end == '\0' && idx >= 1 &&
        static_cast<std::size_t>(idx) <= ncol) {
      resp = static_cast<std::size_t>(idx - 1);
    }
  }
  if (resp == ncol) {
    throw std::runtime_error("response column '" + opts.response +
                             "' not found");
  }

  CsvData out;
  const auto n = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(ncol - 1);
  out.data.X.resize(n, p);
  out.data.y.resize(n);
  out.data.column_scales = Vector::Ones(p);
  out.data.standardized = false;
  for (Index i = 0; i < n; ++i) {
    Index k = 0;
    for (std::size_t c = 0; c < ncol; ++c) {
      if (c == resp) {
        out.data.y[i] = rows[static_cast<std::size_t>(i)][c];
      } else {
        out.data.X(i, k++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  for (std::size_t c = 0; c < ncol; ++c) {
    if (c == resp) continue;
    out.column_names.push_back(opts.has_header ? header[c]
                                               : "x" + std::to_string(c + 1));
  }
  out.response_name = opts.has_header ? header[resp] : opts.response;
  return out;
}

}  // namespace hdinfer

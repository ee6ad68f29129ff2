#pragma once

#include <string>
#include <vector>

#include "hdinfer/types.hpp"

namespace hdinfer {

struct CsvOptions {
  bool has_header = true;
  std::string response;  // column name (with header) or 1-based index
};

struct CsvData {
  RegressionData data;                    // unstandardized
  std::vector<std::string> column_names;  // predictors, in X column order
  std::string response_name;
};

// Comma-separated, '.' decimal point, UTF-8.  The response column is selected
// by name (header required) or 1-based index; the remaining numeric columns
// form X in file order.
CsvData load_regression_csv(const std::string& path, const CsvOptions& opts);

}  // namespace hdinfer

#pragma once

#include "soliton/fit.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace soliton {

// 17 significant digits, lossless for doubles and independent of locale.
std::string format_number(double v);

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable &row(const std::vector<double> &values);
  std::string str() const;
  std::size_t rows() const { return rows_; }

private:
  std::size_t columns_, rows_ = 0;
  std::string text_;
};

// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path &path, const std::string &content);

// Output directory: $SOLITON_OUTPUT_ROOT/<dir> when the variable is set, else <dir>.
std::filesystem::path output_directory(const std::string &dir);

nlohmann::ordered_json to_json(const FitResult &f);

} // namespace soliton

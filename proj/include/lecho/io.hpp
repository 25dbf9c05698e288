#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace lecho {

/// Columnar table written as CSV with a header row and 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

std::string format_double(double v);
/// FNV-1a 64-bit, hex encoded.
std::string fnv1a_hex(const std::string& text);
std::string iso_timestamp_utc();

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lecho

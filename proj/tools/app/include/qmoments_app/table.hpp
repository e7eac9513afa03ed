#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace qmoments::app {

/// Column-oriented result of one command. Every cell is already a string:
/// exact values as "num/den" or decimal integers, floats with 17 digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

std::string csv_escape(const std::string& cell);

}  // namespace qmoments::app

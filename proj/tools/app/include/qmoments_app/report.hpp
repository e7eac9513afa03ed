#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qmoments::app {

enum class CheckStatus { pass, fail, info };

std::string to_string(CheckStatus status);
CheckStatus parse_check_status(const std::string& text);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::info;
  std::string observed;
  std::string expected;
  std::string tolerance;
  std::string paper_anchor;
};

struct VerificationReport {
  std::string version;
  std::vector<Check> checks;

  /// False when any pass/fail check failed; info checks never count.
  bool passed() const;
  nlohmann::json to_json() const;
  static VerificationReport from_json(const nlohmann::json& j);
};

}  // namespace qmoments::app

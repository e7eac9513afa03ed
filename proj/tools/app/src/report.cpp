#include "qmoments_app/report.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmoments::app {

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::info:
      return "info";
  }
  return "info";
}

CheckStatus parse_check_status(const std::string& text) {
  if (text == "pass") return CheckStatus::pass;
  if (text == "fail") return CheckStatus::fail;
  if (text == "info") return CheckStatus::info;
  throw std::invalid_argument("unknown check status '" + text + "'");
}

bool VerificationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == CheckStatus::fail; });
}

nlohmann::json VerificationReport::to_json() const {
  auto list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"status", to_string(c.status)},
                    {"observed", c.observed},
                    {"expected", c.expected},
                    {"tolerance", c.tolerance},
                    {"paper_anchor", c.paper_anchor}});
  }
  return {{"version", version}, {"checks", std::move(list)}};
}

VerificationReport VerificationReport::from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.version = j.at("version").get<std::string>();
  for (const auto& c : j.at("checks")) {
    r.checks.push_back({c.at("name").get<std::string>(), parse_check_status(c.at("status").get<std::string>()),
                        c.at("observed").get<std::string>(), c.at("expected").get<std::string>(),
                        c.at("tolerance").get<std::string>(), c.at("paper_anchor").get<std::string>()});
  }
  return r;
}

}  // namespace qmoments::app

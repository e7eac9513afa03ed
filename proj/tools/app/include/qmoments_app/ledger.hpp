#pragma once

// Append-only newline-delimited JSON ledger of command runs.

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qmoments::app {

struct RunRecord {
  std::string timestamp;  // UTC, RFC 3339
  std::vector<std::string> command_line;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::string> outputs;
  double runtime_ms = 0.0;
  std::string version;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string rfc3339_utc(std::chrono::system_clock::time_point when);

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

/// One line, no trailing newline.
std::string serialize(const RunRecord& record);
/// Throws std::invalid_argument on malformed input.
RunRecord parse_record(std::string_view line);

/// Serializes appends from any number of threads through one lock; each
/// record is written and flushed as a single line.
class LedgerWriter {
 public:
  explicit LedgerWriter(std::filesystem::path path);
  const std::filesystem::path& path() const { return path_; }
  void append(const RunRecord& record);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

std::vector<RunRecord> read_ledger(const std::filesystem::path& path);

}  // namespace qmoments::app

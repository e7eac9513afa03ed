#include "qmoments_app/ledger.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace qmoments::app {

std::string rfc3339_utc(std::chrono::system_clock::time_point when) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(when.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms % 1000));
  return out;
}

nlohmann::json to_json(const RunRecord& record) {
  return {{"timestamp", record.timestamp},   {"command_line", record.command_line},
          {"parameters", record.parameters}, {"outputs", record.outputs},
          {"runtime_ms", record.runtime_ms}, {"version", record.version}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.timestamp = j.at("timestamp").get<std::string>();
  r.command_line = j.at("command_line").get<std::vector<std::string>>();
  r.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
  r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  r.runtime_ms = j.at("runtime_ms").get<double>();
  r.version = j.at("version").get<std::string>();
  return r;
}

std::string serialize(const RunRecord& record) { return to_json(record).dump(); }

RunRecord parse_record(std::string_view line) {
  try {
    return record_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed ledger record: ") + e.what());
  }
}

LedgerWriter::LedgerWriter(std::filesystem::path path) : path_(std::move(path)) {}

void LedgerWriter::append(const RunRecord& record) {
  const std::string line = serialize(record) + "\n";
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open ledger " + path_.string());
  out << line;
  out.flush();
}

std::vector<RunRecord> read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ledger " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_record(line));
  }
  return out;
}

}  // namespace qmoments::app

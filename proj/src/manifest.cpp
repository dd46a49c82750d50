#include "sogtok/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "sogtok/error.hpp"
#include "sogtok/graph_io.hpp"
#include "sogtok/random.hpp"

namespace sogtok {

std::string checksum_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

FileChecksum checksum_file(const std::string& path) { return {path, checksum_hex(read_file(path))}; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

nlohmann::ordered_json checksums_to_json(const std::vector<FileChecksum>& files) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : files) arr.push_back({{"path", f.path}, {"fnv1a64", f.fnv1a64}});
  return arr;
}

std::vector<FileChecksum> checksums_from_json(const nlohmann::json& arr) {
  std::vector<FileChecksum> out;
  for (const auto& f : arr) out.push_back({f.at("path").get<std::string>(), f.at("fnv1a64").get<std::string>()});
  return out;
}

}  // namespace

std::string format_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  if (m.has_seed) {
    j["seed"] = m.seed;
  } else {
    j["seed"] = nullptr;
  }
  j["inputs"] = checksums_to_json(m.inputs);
  j["outputs"] = checksums_to_json(m.outputs);
  j["version"] = m.version;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSyntaxError, std::string("manifest: ") + e.what());
  }
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.value("config", nlohmann::ordered_json::object());
    if (j.contains("seed") && !j.at("seed").is_null()) {
      m.seed = j.at("seed").get<std::uint64_t>();
      m.has_seed = true;
    }
    m.inputs = checksums_from_json(j.value("inputs", nlohmann::json::array()));
    m.outputs = checksums_from_json(j.value("outputs", nlohmann::json::array()));
    m.version = j.value("version", "");
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSemanticError, std::string("manifest: ") + e.what());
  }
}

}  // namespace sogtok

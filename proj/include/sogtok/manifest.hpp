#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sogtok {

struct FileChecksum {
  std::string path;
  std::string fnv1a64;  // 16 lowercase hex digits

  bool operator==(const FileChecksum&) const = default;
};

// Record of one CLI invocation. `argv` (without the program name) is enough
// to re-run it; `config` materializes every option, defaults included.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<FileChecksum> inputs;
  std::vector<FileChecksum> outputs;
  std::string version;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
};

std::string checksum_hex(std::string_view bytes);
// Throws IOFailure when the file cannot be read.
FileChecksum checksum_file(const std::string& path);

std::string utc_timestamp();

std::string format_manifest(const RunManifest& manifest);
// Throws SyntaxError or SemanticError.
RunManifest parse_manifest(std::string_view text);

}  // namespace sogtok

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace vcrit::app {

inline constexpr const char* kToolVersion = "0.1.0";

/// Lower-case hex SHA-256 of a file's bytes. Throws IoError when unreadable.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

struct FileDigest {
  std::string path;  ///< relative to the manifest directory when inside it
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// One manifest entry per command invocation. Appended as a JSON line to manifest.jsonl in
/// the output directory; existing lines are never rewritten.
class RunManifest {
 public:
  RunManifest(std::string command, const nlohmann::json& config, std::uint64_t seed,
              unsigned threads);

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void note(const std::string& key, nlohmann::json value);

  nlohmann::json to_json(const std::filesystem::path& base) const;
  /// Digests are taken at this point, so outputs must be complete.
  void append_to(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  std::string started_;
  nlohmann::json config_;
  std::uint64_t seed_;
  unsigned threads_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  nlohmann::json notes_ = nlohmann::json::object();
};

std::string utc_timestamp();

}  // namespace vcrit::app

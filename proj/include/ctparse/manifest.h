// Run manifests: what was run, with which flags and seed, on which inputs,
// producing which outputs (by SHA-256), and when.

#ifndef CTPARSE_MANIFEST_H_
#define CTPARSE_MANIFEST_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ctparse {

inline constexpr std::string_view kToolVersion = "0.3.0";

std::string Sha256Hex(std::string_view data);
// Digest of a file's bytes. Throws InputError if it cannot be read.
std::string Sha256File(const std::string &path);

// UTC, second resolution: "2024-05-01T12:00:00Z".
std::string UtcTimestamp();

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  nlohmann::json flags = nlohmann::json::object();
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string started;
  std::string finished;
  std::string version{kToolVersion};
  int exit_code = 0;

  void AddInput(const std::string &path);
  void AddOutput(const std::string &path);
  nlohmann::json ToJson() const;
};

}  // namespace ctparse

#endif  // CTPARSE_MANIFEST_H_

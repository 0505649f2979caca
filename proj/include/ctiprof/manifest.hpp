#pragma once

#include <map>
#include <string>
#include <vector>

namespace ctiprof {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility record written alongside every command's outputs:
/// tool version, each input file's SHA-256, and the effective configuration.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::map<std::string, std::string> config;

  void add_input(const std::string& path);  // hashes the file's bytes
};

/// Writes <out_dir>/manifest.json. The created_at timestamp is the only
/// field allowed to differ between byte-identical runs.
void write_manifest(const std::string& out_dir, const RunManifest& manifest);

}  // namespace ctiprof

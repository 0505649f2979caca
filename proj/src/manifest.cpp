#include "ctiprof/manifest.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ctiprof/sha256.hpp"
#include "json.hpp"

namespace ctiprof {

void RunManifest::add_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash input: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  inputs.emplace_back(path, sha256_hex(buf.str()));
}

void write_manifest(const std::string& out_dir, const RunManifest& manifest) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json doc;
  doc["tool"] = "ctiprof";
  doc["version"] = kToolVersion;
  doc["command"] = manifest.command;
  {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    doc["created_at"] = buf;
  }
  doc["inputs"] = nlohmann::json::array();
  for (const auto& [path, hash] : manifest.inputs) {
    doc["inputs"].push_back({{"path", path}, {"sha256", hash}});
  }
  doc["config"] = manifest.config;
  std::ofstream out(std::filesystem::path(out_dir) / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest under " + out_dir);
  out << doc.dump(2) << "\n";
}

}  // namespace ctiprof

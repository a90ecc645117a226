#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/learn/dataset.hpp"

namespace camarm {

inline constexpr const char* kEpisodeMagic = "CAMEPI01";
inline constexpr const char* kEpisodeSchema = "camarm.episode/1";
inline constexpr const char* kManifestSchema = "camarm.manifest/1";

// Byte layout (little-endian), see docs/formats.md:
//   char[8]  magic "CAMEPI01"
//   u32      header length N, then N bytes of JSON header
//   u64      joint samples, each f64 t + 6 x f64 q
//   u64      feature samples, each f64 t + 16 x f64 feature
//   16 x f64 goal feature
// `stamp` is merged into the header (config hash, seed).
void write_episode(const std::filesystem::path& path, const Episode& e, const nlohmann::json& stamp = nlohmann::json::object());
Episode read_episode(const std::filesystem::path& path);
// Header JSON only.
nlohmann::json read_episode_header(const std::filesystem::path& path);

struct ManifestEntry {
  std::string file;  // relative to the manifest directory
  std::string id;
  std::string split;  // train | val | test
  bool obstacle = false;
  std::string style;
};

struct Manifest {
  std::vector<ManifestEntry> episodes;
  nlohmann::json stamp = nlohmann::json::object();
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace camarm

#include "camarm/learn/episode_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace camarm {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ValidationError("episode file truncated");
  return v;
}

nlohmann::json read_header(std::istream& is, const std::filesystem::path& path) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kEpisodeMagic, 8) != 0)
    throw ValidationError(path.string() + ": not an episode file");
  const auto n = get<std::uint32_t>(is);
  std::string text(n, '\0');
  if (!is.read(text.data(), n)) throw ValidationError(path.string() + ": truncated header");
  return nlohmann::json::parse(text);
}

}  // namespace

void write_episode(const std::filesystem::path& path, const Episode& e, const nlohmann::json& stamp) {
  e.validate();
  nlohmann::json h = {{"schema", kEpisodeSchema},       {"id", e.id},
                      {"scene", scene_to_json(e.scene)}, {"provenance", to_string(e.provenance)},
                      {"obstacle", e.obstacle},         {"style", e.style},
                      {"joint_rate", e.joint_rate},     {"feature_rate", e.feature_rate}};
  for (const auto& [k, v] : stamp.items()) h[k] = v;
  const std::string text = h.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kEpisodeMagic, 8);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(os, e.joints.size());
  for (std::size_t i = 0; i < e.joints.size(); ++i) {
    put(os, e.joint_time[i]);
    for (int j = 0; j < kNumJoints; ++j) put(os, e.joints[i][j]);
  }
  put<std::uint64_t>(os, e.features.size());
  for (std::size_t i = 0; i < e.features.size(); ++i) {
    put(os, e.feature_time[i]);
    for (double v : e.features[i].v) put(os, v);
  }
  for (double v : e.goal.v) put(os, v);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json read_episode_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  return read_header(is, path);
}

Episode read_episode(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  const nlohmann::json h = read_header(is, path);
  if (h.value("schema", std::string()) != kEpisodeSchema) throw ValidationError(path.string() + ": unsupported schema");
  Episode e;
  e.id = h.at("id").get<std::string>();
  e.scene = scene_from_json(h.at("scene"));
  e.provenance = provenance_from_string(h.at("provenance").get<std::string>());
  e.obstacle = h.at("obstacle").get<bool>();
  e.style = h.value("style", std::string());
  e.joint_rate = h.at("joint_rate").get<double>();
  e.feature_rate = h.at("feature_rate").get<double>();
  const auto nj = get<std::uint64_t>(is);
  e.joint_time.resize(nj);
  e.joints.resize(nj);
  for (std::uint64_t i = 0; i < nj; ++i) {
    e.joint_time[i] = get<double>(is);
    for (int j = 0; j < kNumJoints; ++j) e.joints[i][j] = get<double>(is);
  }
  const auto nf = get<std::uint64_t>(is);
  e.feature_time.resize(nf);
  e.features.resize(nf);
  for (std::uint64_t i = 0; i < nf; ++i) {
    e.feature_time[i] = get<double>(is);
    for (double& v : e.features[i].v) v = get<double>(is);
  }
  for (double& v : e.goal.v) v = get<double>(is);
  e.validate();
  return e;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  nlohmann::json j = {{"schema", kManifestSchema}, {"episodes", nlohmann::json::array()}};
  for (const auto& [k, v] : m.stamp.items()) j[k] = v;
  for (const ManifestEntry& e : m.episodes)
    j["episodes"].push_back({{"file", e.file}, {"id", e.id}, {"split", e.split}, {"obstacle", e.obstacle}, {"style", e.style}});
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  const nlohmann::json j = nlohmann::json::parse(is);
  if (j.value("schema", std::string()) != kManifestSchema) throw ValidationError(path.string() + ": not a manifest");
  Manifest m;
  for (const auto& [k, v] : j.items())
    if (k != "schema" && k != "episodes") m.stamp[k] = v;
  for (const auto& e : j.at("episodes")) {
    ManifestEntry me;
    me.file = e.at("file").get<std::string>();
    me.id = e.at("id").get<std::string>();
    me.split = e.at("split").get<std::string>();
    me.obstacle = e.value("obstacle", false);
    me.style = e.value("style", std::string());
    if (me.split != "train" && me.split != "val" && me.split != "test")
      throw ValidationError(path.string() + ": bad split '" + me.split + "'");
    m.episodes.push_back(std::move(me));
  }
  return m;
}

}  // namespace camarm

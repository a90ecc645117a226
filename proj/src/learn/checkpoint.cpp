#include "camarm/learn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "camarm/util/hash.hpp"

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
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ValidationError("checkpoint truncated");
  return v;
}

}  // namespace

std::string policy_hash(const Policy& policy) {
  return config_hash({{"policy", to_json(policy.config)}, {"norm", to_json(policy.norm)}});
}

void write_checkpoint(const std::filesystem::path& path, const Policy& policy, const nlohmann::json& stamp) {
  nlohmann::json h = {{"schema", kCheckpointSchema},
                      {"policy", to_json(policy.config)},
                      {"norm", to_json(policy.norm)},
                      {"policy_hash", policy_hash(policy)}};
  for (const auto& [k, v] : stamp.items()) h[k] = v;
  const std::string text = h.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kCheckpointMagic, 8);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(policy.params.size()));
  for (const Parameter& p : policy.params) {
    put<std::uint16_t>(os, static_cast<std::uint16_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.value.rows));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.value.cols));
    for (double v : p.value.data) put(os, v);
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw ValidationError(path.string() + ": not a checkpoint");
  const auto n = get<std::uint32_t>(is);
  std::string text(n, '\0');
  if (!is.read(text.data(), n)) throw ValidationError(path.string() + ": truncated header");
  const nlohmann::json h = nlohmann::json::parse(text);
  if (h.value("schema", std::string()) != kCheckpointSchema) throw ValidationError(path.string() + ": unsupported schema");

  Checkpoint c;
  c.policy = Policy(policy_config_from_json(h.at("policy")), 0);
  c.policy.norm = norm_stats_from_json(h.at("norm"));
  for (const auto& [k, v] : h.items())
    if (k != "schema" && k != "policy" && k != "norm") c.stamp[k] = v;

  const auto count = get<std::uint32_t>(is);
  if (static_cast<int>(count) != c.policy.params.size()) throw ValidationError(path.string() + ": tensor count mismatch");
  std::vector<bool> seen(count, false);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint16_t>(is);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw ValidationError(path.string() + ": truncated tensor name");
    const int idx = c.policy.params.find(name);
    if (idx < 0 || seen[static_cast<std::size_t>(idx)]) throw ValidationError(path.string() + ": unexpected tensor '" + name + "'");
    seen[static_cast<std::size_t>(idx)] = true;
    Mat& m = c.policy.params[idx].value;
    const auto rows = get<std::uint32_t>(is);
    const auto cols = get<std::uint32_t>(is);
    if (static_cast<int>(rows) != m.rows || static_cast<int>(cols) != m.cols)
      throw ValidationError(path.string() + ": shape mismatch for '" + name + "'");
    for (double& v : m.data) v = get<double>(is);
  }
  if (c.stamp.contains("policy_hash") && c.stamp["policy_hash"] != policy_hash(c.policy))
    throw ValidationError(path.string() + ": policy hash mismatch");
  return c;
}

}  // namespace camarm

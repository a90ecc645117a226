#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "camarm/learn/policy.hpp"

namespace camarm {

inline constexpr const char* kCheckpointMagic = "CAMCKPT1";
inline constexpr const char* kCheckpointSchema = "camarm.checkpoint/1";

// Byte layout (little-endian):
//   char[8] magic "CAMCKPT1"
//   u32     header length N, then N bytes of JSON header
//           {schema, policy config, norm stats, plus the caller's stamp}
//   u32     tensor count, then per tensor:
//           u16 name length, name bytes, u32 rows, u32 cols, rows*cols f64
struct Checkpoint {
  Policy policy;
  nlohmann::json stamp = nlohmann::json::object();  // config hash, seed, training summary
};

void write_checkpoint(const std::filesystem::path& path, const Policy& policy,
                      const nlohmann::json& stamp = nlohmann::json::object());
// Rebuilds the architecture from the stored config and fills every tensor by
// name; missing, extra, or mis-shaped tensors are rejected.
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Hash of the policy config and norm stats; stable identity of a deployable policy.
std::string policy_hash(const Policy& policy);

}  // namespace camarm

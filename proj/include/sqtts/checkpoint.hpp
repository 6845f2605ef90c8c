#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

#include <json.hpp>

namespace sqtts {

inline constexpr int kCheckpointVersion = 1;

// Single-file archive: schema-checked JSON config, named float arrays, named
// strings (rng state and the like), all covered by a trailing CRC32.
struct Checkpoint {
  nlohmann::json config;
  std::map<std::string, Eigen::MatrixXf> arrays;
  std::map<std::string, std::string> strings;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::uint32_t crc32(const unsigned char* data, std::size_t len);

}  // namespace sqtts

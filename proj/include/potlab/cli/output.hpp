#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace potlab {

struct Artifact {
  std::string name;
  std::string content;
};

/// Lowercase hex SHA-256 of data.
std::string sha256_hex(const std::string& data);

/// Manifest of a set of artifacts: name, sha256 and size per file (sorted by
/// name) and the seed of the run.
nlohmann::json make_manifest(const std::vector<Artifact>& artifacts, std::uint64_t seed);

/// Writes every artifact and manifest.json into dir, each through a temporary
/// file renamed into place. Throws IoError when dir cannot be created or written.
nlohmann::json write_outputs(const std::vector<Artifact>& artifacts, const std::string& dir, std::uint64_t seed);

}  // namespace potlab

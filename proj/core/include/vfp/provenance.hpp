#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace vfp {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Writes provenance.json into dir: the resolved config, its digest, and
/// per-input content digests, in sorted order so re-runs are byte-identical.
void write_provenance(const std::filesystem::path& dir,
                      const nlohmann::json& resolved_config,
                      const std::vector<std::filesystem::path>& inputs);

}  // namespace vfp

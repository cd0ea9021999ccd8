#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "svtas/model.hpp"

namespace svtas {

// Single-file checkpoint:
//   8-byte magic "SVTASCK1"
//   u64 little-endian manifest length
//   JSON manifest {config, config_hash, variant, class_names, vocab, run, tensors}
//   raw little-endian float32 data, tensors in manifest order
struct CheckpointManifest {
    ModelConfig config;
    Variant variant = Variant::Sete;
    std::vector<std::string> class_names;
    std::string config_hash;
    nlohmann::json run; // free-form metadata from save_checkpoint
    nlohmann::json raw;
};

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const nlohmann::json& run = nlohmann::json::object());

// Throws DataError on a malformed or truncated file, ConfigError when the
// stored config is invalid.
Model<float> load_checkpoint(const std::filesystem::path& path);

CheckpointManifest read_checkpoint_manifest(const std::filesystem::path& path);

} // namespace svtas

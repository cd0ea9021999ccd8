#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "svtas/config.hpp"

namespace svtas {

// Everything a CLI run depends on. Loaded from a JSON file, then overridden
// by command-line flags.
struct RunConfig {
    ModelConfig model;
    Variant variant = Variant::Sete;
    std::uint64_t seed = 0;
    std::size_t epochs = 30;
    std::optional<std::string> synthetic; // preset name
    std::optional<std::string> dataset;   // dataset root
    std::string out = "out";

    // Hash over everything except the output directory.
    std::string hash() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
// Unknown keys raise ConfigError; "model" may hold any subset of ModelConfig keys.
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace svtas

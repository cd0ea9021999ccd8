#include "svtas/run_config.hpp"

#include <algorithm>
#include <fstream>

#include "svtas/errors.hpp"

namespace svtas {

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = {{"model", c.model}, {"variant", variant_name(c.variant)}, {"seed", c.seed}, {"epochs", c.epochs},
         {"out", c.out}};
    j["synthetic"] = c.synthetic ? nlohmann::json(*c.synthetic) : nlohmann::json(nullptr);
    j["dataset"] = c.dataset ? nlohmann::json(*c.dataset) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, RunConfig& c) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    static const char* known[] = {"model", "variant", "seed", "epochs", "synthetic", "dataset", "out"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
            throw ConfigError("unknown run config key '" + it.key() + "'");
    }
    try {
        if (j.contains("model")) c.model = j.at("model").get<ModelConfig>();
        if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
        if (j.contains("synthetic") && !j.at("synthetic").is_null()) c.synthetic = j.at("synthetic").get<std::string>();
        if (j.contains("dataset") && !j.at("dataset").is_null()) c.dataset = j.at("dataset").get<std::string>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return j.get<RunConfig>();
}

std::string RunConfig::hash() const {
    nlohmann::json j = *this;
    j.erase("out");
    return config_hash(j);
}

} // namespace svtas

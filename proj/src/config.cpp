#include "svtas/config.hpp"

#include <cstdio>

#include "svtas/errors.hpp"

namespace svtas {

Variant parse_variant(const std::string& name) {
    if (name == "sete") return Variant::Sete;
    if (name == "mete") return Variant::Mete;
    if (name == "transeger") return Variant::Transeger;
    throw ConfigError("unknown model variant '" + name + "' (expected sete, mete or transeger)");
}

std::string variant_name(Variant v) {
    switch (v) {
    case Variant::Sete: return "sete";
    case Variant::Mete: return "mete";
    case Variant::Transeger: return "transeger";
    }
    return "?";
}

std::size_t ModelConfig::block_channels(std::size_t block) const {
    return block < encoder_channels.size() ? encoder_channels[block] : d_i;
}

std::size_t ModelConfig::block_height(std::size_t block) const {
    std::size_t h = height;
    for (std::size_t b = 0; b <= block; ++b) h = (h + 2 - 3) / 2 + 1;
    return h;
}

std::size_t ModelConfig::block_width(std::size_t block) const {
    std::size_t w = width;
    for (std::size_t b = 0; b <= block; ++b) w = (w + 2 - 3) / 2 + 1;
    return w;
}

std::size_t ModelConfig::shifted_channels(std::size_t block_channels) const {
    return std::size_t(double(block_channels) * shift_fraction);
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("invalid model config: " + msg); };
    if (k < 1) fail("k must be >= 1");
    if (sample_rate < 1) fail("sample_rate must be >= 1");
    if (height < 2 || width < 2) fail("frame size must be at least 2x2");
    if (d_i == 0 || d_t == 0 || tcn_channels == 0 || embed_dim == 0) fail("dims must be positive");
    for (auto c : encoder_channels)
        if (c == 0) fail("encoder channels must be positive");
    if (!(shift_fraction > 0.0 && shift_fraction <= 0.5)) fail("shift_fraction must be in (0, 0.5]");
    for (std::size_t b = 0; b < encoder_blocks(); ++b) {
        if (shifted_channels(block_channels(b)) < 1) {
            fail("encoder block " + std::to_string(b) + " has " +
                 std::to_string(block_channels(b)) + " channels; shift_fraction leaves none shifted");
        }
    }
    if (num_classes < 1) fail("num_classes must be >= 1");
    if (tcn_layers < 1) fail("tcn_layers must be >= 1");
    if (tcn_kernel < 2) fail("tcn_kernel must be >= 2");
    if (text_layers < 1 || text_heads < 1) fail("text encoder needs layers and heads");
    if (d_t % text_heads != 0) fail("d_t must be divisible by text_heads");
    if (max_tokens < 4) fail("max_tokens too small");
    if (!(lambda_smooth >= 0.0)) fail("lambda_smooth must be >= 0");
    if (!(tau_smooth > 0.0)) fail("tau_smooth must be > 0");
    if (!(clip_temperature > 0.0)) fail("clip_temperature must be > 0");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
    if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{
        {"k", c.k},
        {"sample_rate", c.sample_rate},
        {"height", c.height},
        {"width", c.width},
        {"encoder_channels", c.encoder_channels},
        {"d_i", c.d_i},
        {"shift_fraction", c.shift_fraction},
        {"d_t", c.d_t},
        {"text_layers", c.text_layers},
        {"text_heads", c.text_heads},
        {"max_tokens", c.max_tokens},
        {"num_classes", c.num_classes},
        {"tcn_layers", c.tcn_layers},
        {"tcn_kernel", c.tcn_kernel},
        {"tcn_channels", c.tcn_channels},
        {"embed_dim", c.embed_dim},
        {"mete_clip_loss", c.mete_clip_loss},
        {"transeger_clip_loss", c.transeger_clip_loss},
        {"lambda_smooth", c.lambda_smooth},
        {"tau_smooth", c.tau_smooth},
        {"clip_temperature", c.clip_temperature},
        {"clip_weight", c.clip_weight},
        {"learning_rate", c.learning_rate},
        {"weight_decay", c.weight_decay},
        {"batch_size", c.batch_size},
    };
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    nlohmann::json defaults = c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!defaults.contains(it.key())) throw ConfigError("unknown model config key '" + it.key() + "'");
    }
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad value for model config key '") + key + "': " + e.what());
        }
    };
    get("k", c.k);
    get("sample_rate", c.sample_rate);
    get("height", c.height);
    get("width", c.width);
    get("encoder_channels", c.encoder_channels);
    get("d_i", c.d_i);
    get("shift_fraction", c.shift_fraction);
    get("d_t", c.d_t);
    get("text_layers", c.text_layers);
    get("text_heads", c.text_heads);
    get("max_tokens", c.max_tokens);
    get("num_classes", c.num_classes);
    get("tcn_layers", c.tcn_layers);
    get("tcn_kernel", c.tcn_kernel);
    get("tcn_channels", c.tcn_channels);
    get("embed_dim", c.embed_dim);
    get("mete_clip_loss", c.mete_clip_loss);
    get("transeger_clip_loss", c.transeger_clip_loss);
    get("lambda_smooth", c.lambda_smooth);
    get("tau_smooth", c.tau_smooth);
    get("clip_temperature", c.clip_temperature);
    get("clip_weight", c.clip_weight);
    get("learning_rate", c.learning_rate);
    get("weight_decay", c.weight_decay);
    get("batch_size", c.batch_size);
}

std::string config_hash(const nlohmann::json& j) {
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace svtas

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace svtas {

enum class Variant { Sete, Mete, Transeger };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

// Every model hyperparameter. Defaults are the desk-scale configuration.
struct ModelConfig {
    // streaming
    std::size_t k = 32;
    std::size_t sample_rate = 4;
    std::size_t height = 48;
    std::size_t width = 48;

    // frame encoder: one stride-2 conv block per entry of encoder_channels, then d_i
    std::vector<std::size_t> encoder_channels{16, 32};
    std::size_t d_i = 64;
    double shift_fraction = 0.125;

    // text encoder
    std::size_t d_t = 64;
    std::size_t text_layers = 2;
    std::size_t text_heads = 4;
    std::size_t max_tokens = 48;

    // temporal model
    std::size_t num_classes = 5;
    std::size_t tcn_layers = 4;
    std::size_t tcn_kernel = 3;
    std::size_t tcn_channels = 64;

    // contrastive heads
    std::size_t embed_dim = 64;
    bool mete_clip_loss = true;
    bool transeger_clip_loss = false;

    // losses and optimizer
    double lambda_smooth = 0.15;
    double tau_smooth = 4.0;
    double clip_temperature = 0.07;
    double clip_weight = 1.0;
    double learning_rate = 5e-4;
    double weight_decay = 1e-4;
    std::size_t batch_size = 2;

    // Throws ConfigError on any violated invariant.
    void validate() const;

    std::size_t shifted_channels(std::size_t block_channels) const;
    std::size_t encoder_blocks() const { return encoder_channels.size() + 1; }
    std::size_t block_channels(std::size_t block) const;
    std::size_t block_height(std::size_t block) const;
    std::size_t block_width(std::size_t block) const;
    std::size_t dilation(std::size_t layer) const { return std::size_t{1} << layer; }
};

void to_json(nlohmann::json& j, const ModelConfig& c);
// Missing keys keep their defaults; unknown keys raise ConfigError.
void from_json(const nlohmann::json& j, ModelConfig& c);

// Stable 64-bit FNV-1a over the canonical JSON dump, rendered as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

} // namespace svtas

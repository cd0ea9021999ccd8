#pragma once

#include <span>
#include <vector>

#include "svtas/autograd.hpp"
#include "svtas/config.hpp"
#include "svtas/parameters.hpp"
#include "svtas/prompt.hpp"

namespace svtas {

// Pre-LayerNorm causal transformer over prompt tokens. A prompt's feature is
// the final layer-normalized hidden state at its end-of-sequence token.
//
// Context slot tokens look up a separate learnable table ("prompt.context",
// [kContextSlots, d_t]) instead of the word embeddings.
template <class T>
class TextEncoder {
public:
    TextEncoder(const ModelConfig& config, std::size_t vocab_size, ParameterStore<T>& params, Rng& rng);

    // One row per prompt: [prompts.size(), d_t].
    ag::Var<T> forward(std::span<const TokenizedPrompt> prompts) const;

private:
    struct Layer {
        ag::Var<T> ln1_g, ln1_b, qkv_w, qkv_b, out_w, out_b;
        ag::Var<T> ln2_g, ln2_b, fc_w, fc_b, proj_w, proj_b;
    };

    ModelConfig config_;
    std::size_t vocab_size_;
    ag::Var<T> token_embedding_, context_, positional_;
    std::vector<Layer> layers_;
    ag::Var<T> final_g_, final_b_;
};

// Tokenizes every prompt and runs the encoder: F^T = t(Pr; theta).
template <class T>
ag::Var<T> encode_text(const PromptSequence& prompts, const Vocabulary& vocab, const TextEncoder<T>& encoder,
                       std::size_t max_tokens);

} // namespace svtas

#include "svtas/text_encoder.hpp"

#include <algorithm>

namespace svtas {

template <class T>
TextEncoder<T>::TextEncoder(const ModelConfig& config, std::size_t vocab_size, ParameterStore<T>& params,
                            Rng& rng)
    : config_(config), vocab_size_(vocab_size) {
    const std::size_t d = config.d_t;
    token_embedding_ = params.add("text.token_embedding", normal_init<T>({vocab_size, d}, 0.02, rng));
    context_ = params.add("prompt.context", normal_init<T>({kContextSlots, d}, 0.02, rng));
    positional_ = params.add("text.positional", normal_init<T>({config.max_tokens, d}, 0.01, rng));
    auto ones = [d] { return Tensor<T>({d}, T(1)); };
    auto zeros = [](std::size_t n) { return Tensor<T>({n}); };
    for (std::size_t l = 0; l < config.text_layers; ++l) {
        const std::string p = "text.layer" + std::to_string(l);
        Layer L;
        L.ln1_g = params.add(p + ".ln1.gamma", ones());
        L.ln1_b = params.add(p + ".ln1.beta", zeros(d));
        L.qkv_w = params.add(p + ".attn.qkv.weight", fan_in_uniform<T>({d, 3 * d}, d, rng));
        L.qkv_b = params.add(p + ".attn.qkv.bias", zeros(3 * d));
        L.out_w = params.add(p + ".attn.out.weight", fan_in_uniform<T>({d, d}, d, rng));
        L.out_b = params.add(p + ".attn.out.bias", zeros(d));
        L.ln2_g = params.add(p + ".ln2.gamma", ones());
        L.ln2_b = params.add(p + ".ln2.beta", zeros(d));
        L.fc_w = params.add(p + ".mlp.fc.weight", fan_in_uniform<T>({d, 4 * d}, d, rng));
        L.fc_b = params.add(p + ".mlp.fc.bias", zeros(4 * d));
        L.proj_w = params.add(p + ".mlp.proj.weight", fan_in_uniform<T>({4 * d, d}, 4 * d, rng));
        L.proj_b = params.add(p + ".mlp.proj.bias", zeros(d));
        layers_.push_back(std::move(L));
    }
    final_g_ = params.add("text.final_ln.gamma", ones());
    final_b_ = params.add("text.final_ln.beta", zeros(d));
}

template <class T>
ag::Var<T> TextEncoder<T>::forward(std::span<const TokenizedPrompt> prompts) const {
    const std::size_t n = prompts.size();
    if (n == 0) throw ShapeError("text encoder: no prompts");
    // Causal attention means tokens after the longest EOS never influence any
    // EOS state, so the batch is cut to that length.
    std::size_t length = 0;
    for (const auto& p : prompts) length = std::max(length, p.length);
    if (length > config_.max_tokens) throw ShapeError("text encoder: prompt longer than max_tokens");

    std::vector<int> ids(n * length), positions(n * length);
    std::vector<std::size_t> eos_rows(n);
    for (std::size_t b = 0; b < n; ++b) {
        if (prompts[b].ids.size() < length) throw ShapeError("text encoder: prompt ids shorter than its length");
        for (std::size_t t = 0; t < length; ++t) {
            int id = prompts[b].ids[t];
            if (id >= Vocabulary::kFirstSlot && id < Vocabulary::kFirstSlot + int(kContextSlots)) {
                id = int(vocab_size_) + (id - Vocabulary::kFirstSlot);
            }
            ids[b * length + t] = id;
            positions[b * length + t] = int(t);
        }
        eos_rows[b] = b * length + prompts[b].length - 1;
    }
    const auto table = ag::concat_rows(token_embedding_, context_);
    auto x = ag::add(ag::embedding<T>(ids, table), ag::embedding<T>(positions, positional_));
    for (const auto& L : layers_) {
        auto h = ag::layer_norm(x, L.ln1_g, L.ln1_b);
        h = ag::causal_attention(ag::linear(h, L.qkv_w, L.qkv_b), n, length, config_.text_heads);
        x = ag::add(x, ag::linear(h, L.out_w, L.out_b));
        h = ag::layer_norm(x, L.ln2_g, L.ln2_b);
        h = ag::linear(ag::gelu(ag::linear(h, L.fc_w, L.fc_b)), L.proj_w, L.proj_b);
        x = ag::add(x, h);
    }
    return ag::layer_norm(ag::gather_rows<T>(x, eos_rows), final_g_, final_b_);
}

template <class T>
ag::Var<T> encode_text(const PromptSequence& prompts, const Vocabulary& vocab, const TextEncoder<T>& encoder,
                       std::size_t max_tokens) {
    std::vector<TokenizedPrompt> tokens;
    tokens.reserve(prompts.size());
    for (const auto& p : prompts.prompts) tokens.push_back(tokenize(p, vocab, max_tokens));
    return encoder.forward(tokens);
}

template class TextEncoder<float>;
template class TextEncoder<double>;
template ag::Var<float> encode_text(const PromptSequence&, const Vocabulary&, const TextEncoder<float>&, std::size_t);
template ag::Var<double> encode_text(const PromptSequence&, const Vocabulary&, const TextEncoder<double>&, std::size_t);

} // namespace svtas

#include <gtest/gtest.h>

#include "support/gradcheck.hpp"
#include "svtas/text_encoder.hpp"

using namespace svtas;
using namespace svtas::testing;

namespace {

ModelConfig small() {
    ModelConfig c;
    c.d_t = 16;
    c.text_heads = 2;
    c.text_layers = 2;
    return c;
}

} // namespace

TEST(TextEncoder, ShapeAndDeterminism) {
    const std::vector<std::string> names{"background", "pour", "stir"};
    Vocabulary vocab(names);
    ParameterStore<double> params;
    Rng rng(3);
    TextEncoder<double> enc(small(), vocab.size(), params, rng);
    const auto prompts = generate_prompts(LabelSequence({0, 1, 1, 2, 2, 2}, 3), names);
    const auto a = encode_text(prompts, vocab, enc, 48).value();
    const auto b = encode_text(prompts, vocab, enc, 48).value();
    EXPECT_EQ(a.shape(), (Shape{6, 16}));
    EXPECT_EQ(a, b);
    // Frames 1 and 2 differ only in their position text.
    bool differ = false;
    for (std::size_t j = 0; j < 16; ++j) differ = differ || a[16 + j] != a[32 + j];
    EXPECT_TRUE(differ);
}

TEST(TextEncoder, ContextSlotsUseTheirOwnTable) {
    const std::vector<std::string> names{"background", "pour"};
    Vocabulary vocab(names);
    ParameterStore<double> params;
    Rng rng(3);
    TextEncoder<double> enc(small(), vocab.size(), params, rng);
    const auto prompts = generate_prompts(LabelSequence({0, 1}, 2), names);
    const auto before = encode_text(prompts, vocab, enc, 48).value();
    auto context = params.get("prompt.context");
    context.mutable_value()[0] += 0.5;
    const auto after = encode_text(prompts, vocab, enc, 48).value();
    EXPECT_NE(before, after);
    // The word-embedding rows of the slot tokens are never read.
    auto table = params.get("text.token_embedding");
    table.mutable_value()[std::size_t(Vocabulary::kFirstSlot) * 16] += 5.0;
    EXPECT_EQ(encode_text(prompts, vocab, enc, 48).value(), after);
}

TEST(TextEncoder, GradientsMatchFiniteDifferences) {
    const std::vector<std::string> names{"background", "pour"};
    Vocabulary vocab(names);
    ParameterStore<double> params;
    Rng rng(4);
    ModelConfig cfg = small();
    cfg.d_t = 8;
    cfg.text_layers = 1;
    TextEncoder<double> enc(cfg, vocab.size(), params, rng);
    const auto prompts = generate_prompts(LabelSequence({0, 1, 1}, 2), names);
    Tensor<double> r({3, 8});
    for (std::size_t i = 0; i < r.numel(); ++i) r[i] = std::sin(double(i) + 1.0);
    std::vector<ag::Var<double>> ps{params.get("prompt.context"), params.get("text.layer0.attn.qkv.weight"),
                                    params.get("text.layer0.mlp.fc.weight"), params.get("text.final_ln.gamma")};
    const auto res = grad_check(ps, [&] { return dot_with(encode_text(prompts, vocab, enc, 48), r); });
    EXPECT_LT(res.max_rel_error, 1e-5);
}

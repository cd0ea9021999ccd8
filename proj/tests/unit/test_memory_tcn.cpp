#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "support/reference.hpp"
#include "svtas/memory_tcn.hpp"

using namespace svtas;
using namespace svtas::testing;

TEST(MemoryTcn, CacheSizeMatchesClosedForm) {
    ModelConfig cfg;
    ParameterStore<float> params;
    Rng rng(1);
    MemoryTcn<float> tcn(64, cfg, params, rng);
    const auto cache = tcn.initial_cache();
    // 2 * (1 + 2 + 4 + 8) rows of 64 floats
    EXPECT_EQ(cache.frames(), 30u);
    EXPECT_EQ(total_cache_frames(cfg), 30u);
    EXPECT_EQ(cache.bytes(), 30u * 64u * 4u);
}

TEST(MemoryTcn, ChunkedMatchesScalarOracleProperty) {
    Gen g(11);
    for (int trial = 0; trial < 25; ++trial) {
        ModelConfig cfg = random_small_config(g);
        const std::size_t in = uniform_size(g, 1, 9), n = uniform_size(g, 1, 90), k = uniform_size(g, 1, 12);
        ParameterStore<double> params;
        Rng rng(trial);
        MemoryTcn<double> tcn(in, cfg, params, rng);
        const auto x = random_tensor<double>(g, {n, in});
        const auto ref = ref_tcn(to_mat(x), params, cfg);
        auto cache = tcn.initial_cache();
        const std::size_t bytes = cache.bytes();
        for (std::size_t s = 0; s < n; s += k) {
            const std::size_t m = std::min(k, n - s);
            Tensor<double> part({m, in});
            std::copy_n(x.data() + s * in, m * in, part.data());
            const auto out = tcn.forward(ag::Var<double>::constant(part), cache).value();
            for (std::size_t t = 0; t < m; ++t)
                for (std::size_t c = 0; c < cfg.num_classes; ++c)
                    ASSERT_NEAR(out[t * cfg.num_classes + c], ref[s + t][c], 1e-10);
            ASSERT_EQ(cache.bytes(), bytes);
        }
    }
}

TEST(MemoryTcn, RejectsForeignCache) {
    ModelConfig cfg;
    ParameterStore<float> params;
    Rng rng(1);
    MemoryTcn<float> tcn(4, cfg, params, rng);
    MemoryCache<float> bad;
    bad.layers.emplace_back(Shape{2, 64});
    EXPECT_THROW(tcn.forward(ag::Var<float>::constant(Tensor<float>({3, 4})), bad), ProtocolError);
    auto wrong_rows = tcn.initial_cache();
    wrong_rows.layers[1] = Tensor<float>({3, 64});
    EXPECT_THROW(tcn.forward(ag::Var<float>::constant(Tensor<float>({3, 4})), wrong_rows), ProtocolError);
    auto ok = tcn.initial_cache();
    EXPECT_THROW(tcn.forward(ag::Var<float>::constant(Tensor<float>({3, 5})), ok), ShapeError);
}

TEST(DilatedCausalConvStep, MatchesOracleAcrossChunks) {
    Gen g(3);
    const std::size_t K = 3, d = 4, ci = 2, co = 3, n = 37;
    const auto w = random_tensor<double>(g, {K, ci, co}), b = random_tensor<double>(g, {co});
    const auto x = random_tensor<double>(g, {n, ci});
    const auto ref = ref_causal_conv(to_mat(x), w, b, d);
    Tensor<double> cache({d * (K - 1), ci});
    for (std::size_t s = 0; s < n; s += 5) {
        const std::size_t m = std::min<std::size_t>(5, n - s);
        Tensor<double> part({m, ci});
        std::copy_n(x.data() + s * ci, m * ci, part.data());
        auto [out, next] = dilated_causal_conv_step(part, cache, K, d, w, b);
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t o = 0; o < co; ++o) ASSERT_NEAR(out[t * co + o], ref[s + t][o], 1e-12);
        cache = next;
    }
}

TEST(RollHistory, KeepsLastRows) {
    Tensor<double> h({3, 1}, std::vector<double>{1, 2, 3});
    Tensor<double> x({2, 1}, std::vector<double>{4, 5});
    EXPECT_EQ(roll_history(h, x).storage(), (std::vector<double>{3, 4, 5}));
    Tensor<double> big({5, 1}, std::vector<double>{6, 7, 8, 9, 10});
    EXPECT_EQ(roll_history(h, big).storage(), (std::vector<double>{8, 9, 10}));
}

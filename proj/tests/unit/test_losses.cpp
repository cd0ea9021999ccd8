#include <gtest/gtest.h>

#include <cmath>

#include "support/generators.hpp"
#include "support/gradcheck.hpp"
#include "support/reference.hpp"
#include "svtas/losses.hpp"

using namespace svtas;
using namespace svtas::testing;

namespace {

Tensor<double> unit_rows(Gen& g, std::size_t n, std::size_t d) {
    auto t = random_tensor<double>(g, {n, d});
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += t[i * d + j] * t[i * d + j];
        for (std::size_t j = 0; j < d; ++j) t[i * d + j] /= std::sqrt(s);
    }
    return t;
}

} // namespace

TEST(SegLoss, UniformLogitsGiveLogC) {
    for (std::size_t c : {2u, 5u, 11u}) {
        LossConfig cfg;
        cfg.num_chunks_norm = 3;
        Tensor<double> logits({7, c}, 0.25);
        LabelSequence labels(std::vector<ClassId>(7, 1), c);
        EXPECT_DOUBLE_EQ(seg_loss(logits, labels, cfg), std::log(double(c)) / 3.0);
    }
}

TEST(SegLoss, SingleFrameHasNoSmoothing) {
    Gen g(1);
    LossConfig with, without;
    without.lambda_smooth = 0;
    const auto logits = random_tensor<double>(g, {1, 4}, -3, 3);
    LabelSequence l({2}, 4);
    EXPECT_EQ(seg_loss(logits, l, with), seg_loss(logits, l, without));
}

TEST(SegLoss, MatchesLoopOracle) {
    Gen g(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = uniform_size(g, 1, 33), c = uniform_size(g, 2, 6);
        LossConfig cfg;
        cfg.lambda_smooth = uniform_real(g, 0, 1);
        cfg.tau_smooth = uniform_real(g, 0.5, 5);
        cfg.num_chunks_norm = uniform_size(g, 1, 5);
        // Wide logits so both truncation and the probability floor are exercised.
        const auto logits = random_tensor<double>(g, {n, c}, -25, 25);
        const auto labels = random_labels(g, n, c);
        const double oracle =
            double(ref_seg_loss(logits, labels, cfg.lambda_smooth, cfg.tau_smooth, double(cfg.num_chunks_norm)));
        ASSERT_NEAR(seg_loss(logits, labels, cfg), oracle, 1e-6 * std::max(1.0, std::fabs(oracle)));
        ASSERT_GE(seg_loss(logits, labels, cfg), 0.0);
        // float path
        const float f = seg_loss(logits.cast<float>(), labels, cfg);
        ASSERT_NEAR(double(f), oracle, 1e-4 * std::max(1.0, std::fabs(oracle)));
    }
}

TEST(SegLoss, LabelsShorterThanLogitsUseThePrefix) {
    Gen g(3);
    const auto logits = random_tensor<double>(g, {6, 3});
    LabelSequence labels({0, 2, 2, 1}, 3);
    Tensor<double> prefix({4, 3});
    std::copy_n(logits.data(), 12, prefix.data());
    LossConfig cfg;
    EXPECT_EQ(seg_loss(logits, labels, cfg), seg_loss(prefix, labels, cfg));
}

TEST(SegLoss, RejectsBadLabels) {
    LossConfig cfg;
    EXPECT_THROW(seg_loss(Tensor<double>({2, 3}), LabelSequence({0, 3}, 4), cfg), Error);
    EXPECT_THROW(seg_loss(Tensor<double>({2, 3}), LabelSequence({0, 1, 1}, 3), cfg), ShapeError);
    cfg.tau_smooth = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(SegLoss, GradientWithFixedReference) {
    // The smoothing term treats frame t-1 as a constant; with a fixed
    // reference tensor the function is an ordinary one and can be checked.
    Gen g(4);
    auto logits = ag::Var<double>::parameter(random_tensor<double>(g, {6, 4}, -2, 2));
    const auto reference = random_tensor<double>(g, {6, 4}, -2, 2);
    const auto labels = LabelSequence({0, 1, 1, 3, 2, 2}, 4);
    LossConfig cfg;
    cfg.num_chunks_norm = 2;
    auto f = [&] {
        auto ce = ag::cross_entropy(logits, labels.values());
        auto tm = ag::truncated_mse(logits, reference, 6, 4.0);
        return ag::scale(ag::add(ce, ag::scale(tm, cfg.lambda_smooth)), 0.5);
    };
    EXPECT_LT(grad_check({logits}, f).max_rel_error, 1e-3);
    // Pure CE path through seg_loss.
    cfg.lambda_smooth = 0;
    EXPECT_LT(grad_check({logits}, [&] { return ag::seg_loss(logits, labels, cfg); }).max_rel_error, 1e-6);
}

TEST(SegLoss, AutogradValueMatchesTensorValue) {
    Gen g(5);
    const auto logits = random_tensor<double>(g, {9, 5}, -4, 4);
    const auto labels = random_labels(g, 9, 5);
    LossConfig cfg;
    cfg.num_chunks_norm = 4;
    EXPECT_EQ(ag::seg_loss(ag::Var<double>::constant(logits), labels, cfg).value()[0], seg_loss(logits, labels, cfg));
}

TEST(ClipLoss, SinglePairIsZero) {
    Gen g(6);
    const auto a = unit_rows(g, 1, 8), b = unit_rows(g, 1, 8);
    EXPECT_EQ(clip_loss(a, b, 0.07), 0.0);
}

TEST(ClipLoss, OrthonormalRowsApproachZero) {
    Tensor<double> eye({4, 4});
    for (std::size_t i = 0; i < 4; ++i) eye[i * 4 + i] = 1;
    EXPECT_LT(clip_loss(eye, eye, 0.01), 1e-30);
    EXPECT_GT(clip_loss(eye, eye, 1.0), clip_loss(eye, eye, 0.1));
}

TEST(ClipLoss, MatchesOracleAndIsSymmetric) {
    Gen g(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = uniform_size(g, 1, 12), d = uniform_size(g, 2, 16);
        const double temp = uniform_real(g, 0.03, 1.0);
        const auto a = unit_rows(g, n, d), b = unit_rows(g, n, d);
        const double oracle = double(ref_clip_loss(a, b, temp));
        ASSERT_NEAR(clip_loss(a, b, temp), oracle, 1e-6 * std::max(1.0, oracle));
        ASSERT_EQ(clip_loss(a, b, temp), clip_loss(b, a, temp));
        const float f = clip_loss(a.cast<float>(), b.cast<float>(), float(temp));
        ASSERT_EQ(f, clip_loss(b.cast<float>(), a.cast<float>(), float(temp)));
    }
}

TEST(ClipLoss, RejectsZeroRow) {
    Tensor<double> a({2, 3}), b({2, 3}, 0.5);
    a[0] = 1;
    EXPECT_THROW(clip_loss(a, b, 0.07), NormalizationError);
}

TEST(ClipLoss, GradientsMatchFiniteDifferences) {
    Gen g(8);
    auto x = ag::Var<double>::parameter(random_tensor<double>(g, {5, 6}));
    auto y = ag::Var<double>::parameter(random_tensor<double>(g, {5, 6}));
    auto f = [&] { return ag::clip_loss(ag::l2_normalize_rows(x), ag::l2_normalize_rows(y), 0.1); };
    EXPECT_LT(grad_check({x, y}, f).max_rel_error, 1e-6);
}

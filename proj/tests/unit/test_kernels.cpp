#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "svtas/kernels.hpp"

using namespace svtas;
using namespace svtas::testing;

namespace {

template <class T>
std::vector<T> naive_gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const std::vector<T>& a,
                          const std::vector<T>& b) {
    std::vector<T> c(m * n, T(0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            long double s = 0;
            for (std::size_t p = 0; p < k; ++p) {
                const T av = ta ? a[p * m + i] : a[i * k + p];
                const T bv = tb ? b[j * k + p] : b[p * n + j];
                s += (long double)av * bv;
            }
            c[i * n + j] = T(s);
        }
    return c;
}

template <class T>
std::vector<T> random_vec(Gen& g, std::size_t n) {
    return random_tensor<T>(g, {n}).storage();
}

} // namespace

TEST(Kernels, GemmMatchesNaiveAllTransposes) {
    Gen g(1);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = uniform_size(g, 1, 17), n = uniform_size(g, 1, 19), k = uniform_size(g, 1, 23);
        const bool ta = trial & 1, tb = trial & 2;
        auto a = random_vec<double>(g, m * k), b = random_vec<double>(g, k * n);
        std::vector<double> c(m * n, 0.0);
        kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), c.data(), false);
        const auto ref = naive_gemm(ta, tb, m, n, k, a, b);
        for (std::size_t i = 0; i < c.size(); ++i) ASSERT_NEAR(c[i], ref[i], 1e-12);
    }
}

TEST(Kernels, GemmAccumulates) {
    Gen g(2);
    auto a = random_vec<double>(g, 6), b = random_vec<double>(g, 6);
    std::vector<double> c(4, 1.5);
    kernels::gemm(false, false, 2, 2, 3, a.data(), b.data(), c.data(), true);
    const auto ref = naive_gemm(false, false, 2, 2, 3, a, b);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(c[i], ref[i] + 1.5, 1e-12);
}

TEST(Kernels, ParallelGemmIsBitIdenticalToSerial) {
    Gen g(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = uniform_size(g, 1, 64), n = uniform_size(g, 1, 64), k = uniform_size(g, 1, 64);
        const bool ta = trial & 1, tb = trial & 2;
        auto a = random_vec<float>(g, m * k), b = random_vec<float>(g, k * n);
        std::vector<float> c1(m * n, 0.25f), c2(m * n, 0.25f);
        kernels::serial::gemm(ta, tb, m, n, k, a.data(), b.data(), c1.data(), trial & 4);
        kernels::omp::gemm(ta, tb, m, n, k, a.data(), b.data(), c2.data(), trial & 4);
        ASSERT_EQ(c1, c2);
    }
}

TEST(Kernels, Conv2dForwardMatchesDirectLoop) {
    Gen g(4);
    kernels::Conv2dGeometry geo{2, 7, 6, 3, 4, 3, 2, 1};
    auto in = random_vec<double>(g, geo.in_size()), w = random_vec<double>(g, geo.weight_size()),
         b = random_vec<double>(g, geo.out_c);
    std::vector<double> out(geo.out_size());
    kernels::conv2d_forward(geo, in.data(), w.data(), b.data(), out.data());
    for (std::size_t f = 0; f < geo.frames; ++f)
        for (std::size_t oy = 0; oy < geo.out_h(); ++oy)
            for (std::size_t ox = 0; ox < geo.out_w(); ++ox)
                for (std::size_t o = 0; o < geo.out_c; ++o) {
                    double s = b[o];
                    for (std::size_t ky = 0; ky < 3; ++ky)
                        for (std::size_t kx = 0; kx < 3; ++kx) {
                            const long iy = long(oy * 2 + ky) - 1, ix = long(ox * 2 + kx) - 1;
                            if (iy < 0 || ix < 0 || iy >= 7 || ix >= 6) continue;
                            for (std::size_t c = 0; c < 3; ++c)
                                s += in[((f * 7 + std::size_t(iy)) * 6 + std::size_t(ix)) * 3 + c] *
                                     w[((ky * 3 + kx) * 3 + c) * 4 + o];
                        }
                    ASSERT_NEAR(out[((f * geo.out_h() + oy) * geo.out_w() + ox) * 4 + o], s, 1e-12);
                }
}

TEST(Kernels, ConvBackwardIsAdjointOfForward) {
    // <conv(x), y> == <x, conv^T(y)> and == <w, dW(x, y)>
    Gen g(5);
    kernels::Conv2dGeometry geo{3, 9, 8, 2, 5, 3, 2, 1};
    auto x = random_vec<double>(g, geo.in_size()), w = random_vec<double>(g, geo.weight_size()),
         y = random_vec<double>(g, geo.out_size());
    std::vector<double> zero_b(geo.out_c, 0.0), out(geo.out_size()), gx(geo.in_size()), gw(geo.weight_size(), 0.0),
        gb(geo.out_c, 0.0);
    kernels::conv2d_forward(geo, x.data(), w.data(), zero_b.data(), out.data());
    kernels::conv2d_backward_input(geo, y.data(), w.data(), gx.data());
    kernels::conv2d_backward_weight(geo, x.data(), y.data(), gw.data(), gb.data());
    double lhs = 0, rhs_x = 0, rhs_w = 0, ysum = 0, gbsum = 0;
    for (std::size_t i = 0; i < out.size(); ++i) lhs += out[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs_x += x[i] * gx[i];
    for (std::size_t i = 0; i < w.size(); ++i) rhs_w += w[i] * gw[i];
    for (double v : y) ysum += v;
    for (double v : gb) gbsum += v;
    EXPECT_NEAR(lhs, rhs_x, 1e-9);
    EXPECT_NEAR(lhs, rhs_w, 1e-9);
    EXPECT_NEAR(ysum, gbsum, 1e-9);
}

TEST(Kernels, ParallelConvIsBitIdenticalToSerial) {
    Gen g(6);
    kernels::Conv2dGeometry geo{5, 12, 10, 3, 8, 3, 2, 1};
    auto x = random_vec<float>(g, geo.in_size()), w = random_vec<float>(g, geo.weight_size()),
         b = random_vec<float>(g, geo.out_c), y = random_vec<float>(g, geo.out_size());
    std::vector<float> o1(geo.out_size()), o2(geo.out_size());
    kernels::serial::conv2d_forward(geo, x.data(), w.data(), b.data(), o1.data());
    kernels::omp::conv2d_forward(geo, x.data(), w.data(), b.data(), o2.data());
    EXPECT_EQ(o1, o2);
    std::vector<float> gi1(geo.in_size()), gi2(geo.in_size());
    kernels::serial::conv2d_backward_input(geo, y.data(), w.data(), gi1.data());
    kernels::omp::conv2d_backward_input(geo, y.data(), w.data(), gi2.data());
    EXPECT_EQ(gi1, gi2);
    std::vector<float> gw1(geo.weight_size(), 0.f), gw2(geo.weight_size(), 0.f), gb1(8, 0.f), gb2(8, 0.f);
    kernels::serial::conv2d_backward_weight(geo, x.data(), y.data(), gw1.data(), gb1.data());
    kernels::omp::conv2d_backward_weight(geo, x.data(), y.data(), gw2.data(), gb2.data());
    EXPECT_EQ(gw1, gw2);
    EXPECT_EQ(gb1, gb2);
}

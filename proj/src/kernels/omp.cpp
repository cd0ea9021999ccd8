#include <vector>

#include "svtas/kernels.hpp"

namespace svtas::kernels::omp {

template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate) {
    // Row-major [k,n] view of op(B) so the inner loop runs over contiguous columns.
    std::vector<T> bt;
    const T* bk = b;
    if (trans_b) {
        bt.resize(k * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
        bk = bt.data();
    }
#pragma omp parallel
    {
        std::vector<T> acc(n);
#pragma omp for schedule(static)
        for (long li = 0; li < long(m); ++li) {
            const std::size_t i = std::size_t(li);
            std::fill(acc.begin(), acc.end(), T(0));
            for (std::size_t p = 0; p < k; ++p) {
                const T av = trans_a ? a[p * m + i] : a[i * k + p];
                const T* brow = bk + p * n;
                for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
            }
            T* crow = c + i * n;
            if (accumulate) {
                for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + acc[j];
            } else {
                for (std::size_t j = 0; j < n; ++j) crow[j] = T(0) + acc[j];
            }
        }
    }
}

template <class T>
void conv2d_forward(const Conv2dGeometry& g, const T* in, const T* weight, const T* bias, T* out) {
    const std::size_t oh = g.out_h(), ow = g.out_w();
    const long rows = long(g.frames * oh);
#pragma omp parallel
    {
        std::vector<T> acc(g.out_c);
#pragma omp for schedule(static)
        for (long r = 0; r < rows; ++r) {
            const std::size_t f = std::size_t(r) / oh, oy = std::size_t(r) % oh;
            for (std::size_t ox = 0; ox < ow; ++ox) {
                std::fill(acc.begin(), acc.end(), T(0));
                for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                    const long iy = long(oy * g.stride + ky) - long(g.pad);
                    if (iy < 0 || iy >= long(g.in_h)) continue;
                    for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                        const long ix = long(ox * g.stride + kx) - long(g.pad);
                        if (ix < 0 || ix >= long(g.in_w)) continue;
                        const T* x = in + ((f * g.in_h + iy) * g.in_w + ix) * g.in_c;
                        const T* wk = weight + (ky * g.kernel + kx) * g.in_c * g.out_c;
                        for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                            const T xv = x[ci];
                            const T* wrow = wk + ci * g.out_c;
                            for (std::size_t co = 0; co < g.out_c; ++co) acc[co] += xv * wrow[co];
                        }
                    }
                }
                T* o = out + ((f * oh + oy) * ow + ox) * g.out_c;
                for (std::size_t co = 0; co < g.out_c; ++co) o[co] = bias[co] + acc[co];
            }
        }
    }
}

template <class T>
void conv2d_backward_input(const Conv2dGeometry& g, const T* grad_out, const T* weight,
                           T* grad_in) {
    const std::size_t oh = g.out_h(), ow = g.out_w();
    const long rows = long(g.frames * g.in_h);
#pragma omp parallel
    {
        std::vector<T> acc(g.in_c);
#pragma omp for schedule(static)
        for (long r = 0; r < rows; ++r) {
            const std::size_t f = std::size_t(r) / g.in_h, iy = std::size_t(r) % g.in_h;
            for (std::size_t ix = 0; ix < g.in_w; ++ix) {
                std::fill(acc.begin(), acc.end(), T(0));
                for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                    const long ty = long(iy + g.pad) - long(ky);
                    if (ty < 0 || ty % long(g.stride) != 0) continue;
                    const std::size_t oy = std::size_t(ty) / g.stride;
                    if (oy >= oh) continue;
                    for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                        const long tx = long(ix + g.pad) - long(kx);
                        if (tx < 0 || tx % long(g.stride) != 0) continue;
                        const std::size_t ox = std::size_t(tx) / g.stride;
                        if (ox >= ow) continue;
                        const T* go = grad_out + ((f * oh + oy) * ow + ox) * g.out_c;
                        const T* wk = weight + (ky * g.kernel + kx) * g.in_c * g.out_c;
                        for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                            const T* wrow = wk + ci * g.out_c;
                            T s = T(0);
                            for (std::size_t co = 0; co < g.out_c; ++co) s += go[co] * wrow[co];
                            acc[ci] += s;
                        }
                    }
                }
                T* gi = grad_in + ((f * g.in_h + iy) * g.in_w + ix) * g.in_c;
                for (std::size_t ci = 0; ci < g.in_c; ++ci) gi[ci] = acc[ci];
            }
        }
    }
}

template <class T>
void conv2d_backward_weight(const Conv2dGeometry& g, const T* in, const T* grad_out,
                            T* grad_weight, T* grad_bias) {
    const std::size_t oh = g.out_h(), ow = g.out_w();
    const long rows = long(g.kernel * g.kernel * g.in_c);
#pragma omp parallel
    {
        std::vector<T> acc(g.out_c);
#pragma omp for schedule(static)
        for (long r = 0; r < rows; ++r) {
            const std::size_t ci = std::size_t(r) % g.in_c;
            const std::size_t kk = std::size_t(r) / g.in_c;
            const std::size_t ky = kk / g.kernel, kx = kk % g.kernel;
            std::fill(acc.begin(), acc.end(), T(0));
            for (std::size_t f = 0; f < g.frames; ++f) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const long iy = long(oy * g.stride + ky) - long(g.pad);
                    if (iy < 0 || iy >= long(g.in_h)) continue;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const long ix = long(ox * g.stride + kx) - long(g.pad);
                        if (ix < 0 || ix >= long(g.in_w)) continue;
                        const T xv = in[((f * g.in_h + iy) * g.in_w + ix) * g.in_c + ci];
                        const T* go = grad_out + ((f * oh + oy) * ow + ox) * g.out_c;
                        for (std::size_t co = 0; co < g.out_c; ++co) acc[co] += xv * go[co];
                    }
                }
            }
            T* gw = grad_weight + std::size_t(r) * g.out_c;
            for (std::size_t co = 0; co < g.out_c; ++co) gw[co] += acc[co];
        }
    }
    std::vector<T> acc(g.out_c, T(0));
    for (std::size_t p = 0; p < g.frames * oh * ow; ++p) {
        const T* go = grad_out + p * g.out_c;
        for (std::size_t co = 0; co < g.out_c; ++co) acc[co] += go[co];
    }
    for (std::size_t co = 0; co < g.out_c; ++co) grad_bias[co] += acc[co];
}

#define SVTAS_INSTANTIATE(T)                                                                     \
    template void gemm<T>(bool, bool, std::size_t, std::size_t, std::size_t, const T*, const T*, \
                          T*, bool);                                                             \
    template void conv2d_forward<T>(const Conv2dGeometry&, const T*, const T*, const T*, T*);    \
    template void conv2d_backward_input<T>(const Conv2dGeometry&, const T*, const T*, T*);       \
    template void conv2d_backward_weight<T>(const Conv2dGeometry&, const T*, const T*, T*, T*);

SVTAS_INSTANTIATE(float)
SVTAS_INSTANTIATE(double)

} // namespace svtas::kernels::omp

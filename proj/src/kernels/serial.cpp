#include "svtas/kernels.hpp"

namespace svtas::kernels::serial {

template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T s = T(0);
            for (std::size_t p = 0; p < k; ++p) {
                const T av = trans_a ? a[p * m + i] : a[i * k + p];
                const T bv = trans_b ? b[j * k + p] : b[p * n + j];
                s += av * bv;
            }
            c[i * n + j] = (accumulate ? c[i * n + j] : T(0)) + s;
        }
    }
}

template <class T>
void conv2d_forward(const Conv2dGeometry& g, const T* in, const T* weight, const T* bias, T* out) {
    const std::size_t oh = g.out_h(), ow = g.out_w();
    for (std::size_t f = 0; f < g.frames; ++f) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                for (std::size_t co = 0; co < g.out_c; ++co) {
                    T s = T(0);
                    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                        const long iy = long(oy * g.stride + ky) - long(g.pad);
                        if (iy < 0 || iy >= long(g.in_h)) continue;
                        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                            const long ix = long(ox * g.stride + kx) - long(g.pad);
                            if (ix < 0 || ix >= long(g.in_w)) continue;
                            for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                                s += in[((f * g.in_h + iy) * g.in_w + ix) * g.in_c + ci] *
                                     weight[((ky * g.kernel + kx) * g.in_c + ci) * g.out_c + co];
                            }
                        }
                    }
                    out[((f * oh + oy) * ow + ox) * g.out_c + co] = bias[co] + s;
                }
            }
        }
    }
}

template <class T>
void conv2d_backward_input(const Conv2dGeometry& g, const T* grad_out, const T* weight,
                           T* grad_in) {
    const std::size_t oh = g.out_h(), ow = g.out_w();
    for (std::size_t f = 0; f < g.frames; ++f) {
        for (std::size_t iy = 0; iy < g.in_h; ++iy) {
            for (std::size_t ix = 0; ix < g.in_w; ++ix) {
                for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                    T total = T(0);
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
                            T s = T(0);
                            for (std::size_t co = 0; co < g.out_c; ++co) {
                                s += grad_out[((f * oh + oy) * ow + ox) * g.out_c + co] *
                                     weight[((ky * g.kernel + kx) * g.in_c + ci) * g.out_c + co];
                            }
                            total += s;
                        }
                    }
                    grad_in[((f * g.in_h + iy) * g.in_w + ix) * g.in_c + ci] = total;
                }
            }
        }
    }
}

template <class T>
void conv2d_backward_weight(const Conv2dGeometry& g, const T* in, const T* grad_out,
                            T* grad_weight, T* grad_bias) {
    const std::size_t oh = g.out_h(), ow = g.out_w();
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                for (std::size_t co = 0; co < g.out_c; ++co) {
                    T s = T(0);
                    for (std::size_t f = 0; f < g.frames; ++f) {
                        for (std::size_t oy = 0; oy < oh; ++oy) {
                            const long iy = long(oy * g.stride + ky) - long(g.pad);
                            if (iy < 0 || iy >= long(g.in_h)) continue;
                            for (std::size_t ox = 0; ox < ow; ++ox) {
                                const long ix = long(ox * g.stride + kx) - long(g.pad);
                                if (ix < 0 || ix >= long(g.in_w)) continue;
                                s += in[((f * g.in_h + iy) * g.in_w + ix) * g.in_c + ci] *
                                     grad_out[((f * oh + oy) * ow + ox) * g.out_c + co];
                            }
                        }
                    }
                    grad_weight[((ky * g.kernel + kx) * g.in_c + ci) * g.out_c + co] += s;
                }
            }
        }
    }
    for (std::size_t co = 0; co < g.out_c; ++co) {
        T s = T(0);
        for (std::size_t p = 0; p < g.frames * oh * ow; ++p) s += grad_out[p * g.out_c + co];
        grad_bias[co] += s;
    }
}

#define SVTAS_INSTANTIATE(T)                                                                     \
    template void gemm<T>(bool, bool, std::size_t, std::size_t, std::size_t, const T*, const T*, \
                          T*, bool);                                                             \
    template void conv2d_forward<T>(const Conv2dGeometry&, const T*, const T*, const T*, T*);    \
    template void conv2d_backward_input<T>(const Conv2dGeometry&, const T*, const T*, T*);       \
    template void conv2d_backward_weight<T>(const Conv2dGeometry&, const T*, const T*, T*, T*);

SVTAS_INSTANTIATE(float)
SVTAS_INSTANTIATE(double)

} // namespace svtas::kernels::serial

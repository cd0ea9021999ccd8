#pragma once

#include <cstddef>

// Dense compute kernels behind the autograd ops.
//
// Two implementations with identical signatures live side by side:
//   kernels::serial  plain loops, kept as the reference for tests
//   kernels::omp     OpenMP-parallel over independent output rows
//
// Both accumulate every output element in the same order, so their results are
// bit-identical for any thread count. The unqualified kernels:: names forward
// to the parallel versions.

namespace svtas::kernels {

// Layout of a 2-D convolution over a batch of NHWC frames with weights stored
// as [kernel, kernel, in_c, out_c].
struct Conv2dGeometry {
    std::size_t frames = 0;
    std::size_t in_h = 0;
    std::size_t in_w = 0;
    std::size_t in_c = 0;
    std::size_t out_c = 0;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t pad = 0;

    std::size_t out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
    std::size_t out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
    std::size_t in_size() const { return frames * in_h * in_w * in_c; }
    std::size_t out_size() const { return frames * out_h() * out_w() * out_c; }
    std::size_t weight_size() const { return kernel * kernel * in_c * out_c; }
};

// gemm:                   C[m,n] = (accumulate ? C : 0) + op(A)[m,k] * op(B)[k,n]
// conv2d_backward_input:  overwrites grad_in
// conv2d_backward_weight: accumulates into grad_weight and grad_bias

namespace serial {
template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate);
template <class T>
void conv2d_forward(const Conv2dGeometry& g, const T* in, const T* weight, const T* bias, T* out);
template <class T>
void conv2d_backward_input(const Conv2dGeometry& g, const T* grad_out, const T* weight,
                           T* grad_in);
template <class T>
void conv2d_backward_weight(const Conv2dGeometry& g, const T* in, const T* grad_out,
                            T* grad_weight, T* grad_bias);
} // namespace serial

namespace omp {
template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate);
template <class T>
void conv2d_forward(const Conv2dGeometry& g, const T* in, const T* weight, const T* bias, T* out);
template <class T>
void conv2d_backward_input(const Conv2dGeometry& g, const T* grad_out, const T* weight,
                           T* grad_in);
template <class T>
void conv2d_backward_weight(const Conv2dGeometry& g, const T* in, const T* grad_out,
                            T* grad_weight, T* grad_bias);
} // namespace omp

using omp::conv2d_backward_input;
using omp::conv2d_backward_weight;
using omp::conv2d_forward;
using omp::gemm;

} // namespace svtas::kernels

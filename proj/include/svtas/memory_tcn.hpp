#pragma once

#include <utility>
#include <vector>

#include "svtas/autograd.hpp"
#include "svtas/config.hpp"
#include "svtas/parameters.hpp"

namespace svtas {

// Left-padding history for every dilated layer. Layer l holds the last
// dilation_l * (kernel - 1) inputs it has seen, [rows, channels]; zeros at
// stream start. Row counts never change over a session.
template <class T>
struct MemoryCache {
    std::vector<Tensor<T>> layers;

    std::size_t frames() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.dim(0);
        return n;
    }
    std::size_t bytes() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.numel() * sizeof(T);
        return n;
    }
};

// Last history.dim(0) rows of (history ++ x).
template <class T>
Tensor<T> roll_history(const Tensor<T>& history, const Tensor<T>& x);

// One dilated causal convolution over a chunk, padded on the left by `cache`.
//   out[t] = bias + sum_m x_pad[t + m*dilation] * weight[m],  x_pad = cache ++ x
// weight is [kernel, c_in, c_out]. Returns the output and the rolled cache.
template <class T>
std::pair<Tensor<T>, Tensor<T>> dilated_causal_conv_step(const Tensor<T>& x, const Tensor<T>& cache,
                                                         std::size_t kernel, std::size_t dilation,
                                                         const Tensor<T>& weight,
                                                         const Tensor<T>& bias);

// sum_l 2^l * (kernel - 1) over the configured layers.
std::size_t total_cache_frames(const ModelConfig& config);

// Single-stage dilated residual TCN:
//   1x1 projection -> L x {dilated causal conv, ReLU, 1x1, residual} -> 1x1 to classes
template <class T>
class MemoryTcn {
public:
    MemoryTcn(std::size_t input_dim, const ModelConfig& config, ParameterStore<T>& params, Rng& rng,
              const std::string& prefix = "tcn");

    MemoryCache<T> initial_cache() const;
    std::size_t input_dim() const { return input_dim_; }

    // x [n, input_dim] -> logits [n, num_classes]; rolls every layer of `cache`.
    ag::Var<T> forward(const ag::Var<T>& x, MemoryCache<T>& cache) const;

private:
    std::size_t input_dim_;
    ModelConfig config_;
    ag::Var<T> in_w_, in_b_, out_w_, out_b_;
    std::vector<ag::Var<T>> dil_w_, dil_b_, pw_w_, pw_b_;
};

} // namespace svtas

#include "svtas/memory_tcn.hpp"

#include <algorithm>

namespace svtas {

template <class T>
Tensor<T> roll_history(const Tensor<T>& history, const Tensor<T>& x) {
    const std::size_t rows = history.dim(0), c = history.dim(1), n = x.dim(0);
    Tensor<T> out({rows, c});
    if (n >= rows) {
        std::copy_n(x.data() + (n - rows) * c, rows * c, out.data());
    } else {
        const std::size_t keep = rows - n;
        std::copy_n(history.data() + n * c, keep * c, out.data());
        std::copy_n(x.data(), n * c, out.data() + keep * c);
    }
    return out;
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> dilated_causal_conv_step(const Tensor<T>& x, const Tensor<T>& cache,
                                                         std::size_t kernel, std::size_t dilation,
                                                         const Tensor<T>& weight,
                                                         const Tensor<T>& bias) {
    if (x.rank() != 2) throw ShapeError("dilated_causal_conv_step: x must be [k, c_in]");
    if (weight.rank() != 3 || weight.dim(0) != kernel) {
        throw ShapeError("dilated_causal_conv_step: weight must be [kernel, c_in, c_out]");
    }
    ag::NoGradGuard guard;
    auto out = ag::causal_conv1d(ag::Var<T>::constant(x), cache, ag::Var<T>::constant(weight),
                                 ag::Var<T>::constant(bias), dilation);
    return {out.value(), roll_history(cache, x)};
}

std::size_t total_cache_frames(const ModelConfig& config) {
    std::size_t frames = 0;
    for (std::size_t l = 0; l < config.tcn_layers; ++l) frames += config.dilation(l) * (config.tcn_kernel - 1);
    return frames;
}

template <class T>
MemoryTcn<T>::MemoryTcn(std::size_t input_dim, const ModelConfig& config, ParameterStore<T>& params,
                        Rng& rng, const std::string& prefix)
    : input_dim_(input_dim), config_(config) {
    const std::size_t c = config.tcn_channels, kk = config.tcn_kernel;
    in_w_ = params.add(prefix + ".input.weight", fan_in_uniform<T>({input_dim, c}, input_dim, rng));
    in_b_ = params.add(prefix + ".input.bias", fan_in_uniform<T>({c}, input_dim, rng));
    for (std::size_t l = 0; l < config.tcn_layers; ++l) {
        const std::string p = prefix + ".layer" + std::to_string(l);
        dil_w_.push_back(params.add(p + ".dilated.weight", he_uniform<T>({kk, c, c}, kk * c, rng)));
        dil_b_.push_back(params.add(p + ".dilated.bias", fan_in_uniform<T>({c}, kk * c, rng)));
        pw_w_.push_back(params.add(p + ".pointwise.weight", fan_in_uniform<T>({c, c}, c, rng)));
        pw_b_.push_back(params.add(p + ".pointwise.bias", fan_in_uniform<T>({c}, c, rng)));
    }
    out_w_ = params.add(prefix + ".output.weight", fan_in_uniform<T>({c, config.num_classes}, c, rng));
    out_b_ = params.add(prefix + ".output.bias", fan_in_uniform<T>({config.num_classes}, c, rng));
}

template <class T>
MemoryCache<T> MemoryTcn<T>::initial_cache() const {
    MemoryCache<T> cache;
    for (std::size_t l = 0; l < config_.tcn_layers; ++l)
        cache.layers.emplace_back(Shape{config_.dilation(l) * (config_.tcn_kernel - 1), config_.tcn_channels});
    return cache;
}

template <class T>
ag::Var<T> MemoryTcn<T>::forward(const ag::Var<T>& x, MemoryCache<T>& cache) const {
    if (x.value().rank() != 2 || x.dim(1) != input_dim_) {
        throw ShapeError("memory tcn: input " + shape_str(x.shape()) + " expected [n, " +
                         std::to_string(input_dim_) + "]");
    }
    if (cache.layers.size() != dil_w_.size()) {
        throw ProtocolError("memory tcn: cache has " + std::to_string(cache.layers.size()) +
                            " layers, model has " + std::to_string(dil_w_.size()));
    }
    ag::Var<T> h = ag::linear(x, in_w_, in_b_);
    for (std::size_t l = 0; l < dil_w_.size(); ++l) {
        // Padding for the next chunk is this layer's input, before any activation.
        Tensor<T> next = roll_history(cache.layers[l], h.value());
        auto y = ag::relu(ag::causal_conv1d(h, cache.layers[l], dil_w_[l], dil_b_[l], config_.dilation(l)));
        y = ag::linear(y, pw_w_[l], pw_b_[l]);
        h = ag::add(h, y);
        cache.layers[l] = std::move(next);
    }
    return ag::linear(h, out_w_, out_b_);
}

template Tensor<float> roll_history(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> roll_history(const Tensor<double>&, const Tensor<double>&);
template std::pair<Tensor<float>, Tensor<float>> dilated_causal_conv_step(
    const Tensor<float>&, const Tensor<float>&, std::size_t, std::size_t, const Tensor<float>&, const Tensor<float>&);
template std::pair<Tensor<double>, Tensor<double>> dilated_causal_conv_step(
    const Tensor<double>&, const Tensor<double>&, std::size_t, std::size_t, const Tensor<double>&, const Tensor<double>&);
template class MemoryTcn<float>;
template class MemoryTcn<double>;

} // namespace svtas

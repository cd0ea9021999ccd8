#include "svtas/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace svtas {

namespace {
template <class T>
Tensor<T> last_frame_channels(const Tensor<T>& x, std::size_t shifted) {
    const std::size_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    Tensor<T> carry({h, w, shifted});
    const T* last = x.data() + (n - 1) * h * w * c;
    for (std::size_t p = 0; p < h * w; ++p)
        std::copy_n(last + p * c, shifted, carry.data() + p * shifted);
    return carry;
}
} // namespace

template <class T>
std::pair<Tensor<T>, Tensor<T>> temporal_shift(const Tensor<T>& x, double shift_fraction,
                                               const Tensor<T>& carry) {
    if (x.rank() != 4) throw ShapeError("temporal_shift: expected [n,h,w,c], got " + shape_str(x.shape()));
    if (!(shift_fraction > 0.0 && shift_fraction <= 0.5)) {
        throw ConfigError("temporal_shift: shift_fraction must be in (0, 0.5]");
    }
    const std::size_t shifted = std::size_t(std::floor(double(x.dim(3)) * shift_fraction));
    if (shifted < 1) {
        throw ConfigError("temporal_shift: " + std::to_string(x.dim(3)) +
                          " channels with this shift_fraction shift nothing");
    }
    ag::NoGradGuard guard;
    auto out = ag::temporal_shift(ag::Var<T>::constant(x), carry, shifted);
    Tensor<T> next = x.dim(0) > 0 ? last_frame_channels(x, shifted) : carry;
    return {out.value(), std::move(next)};
}

template <class T>
Tensor<T> spatial_squeeze_pool(const Tensor<T>& x) {
    ag::NoGradGuard guard;
    return ag::spatial_mean(ag::Var<T>::constant(x)).value();
}

template <class T>
FrameEncoder<T>::FrameEncoder(const ModelConfig& config, ParameterStore<T>& params, Rng& rng)
    : config_(config) {
    std::size_t in_c = 3;
    for (std::size_t b = 0; b < config.encoder_blocks(); ++b) {
        const std::size_t out_c = config.block_channels(b);
        const std::size_t fan_in = 9 * in_c;
        const std::string prefix = "encoder.block" + std::to_string(b);
        weights_.push_back(params.add(prefix + ".weight", he_uniform<T>({3, 3, in_c, out_c}, fan_in, rng)));
        biases_.push_back(params.add(prefix + ".bias", fan_in_uniform<T>({out_c}, fan_in, rng)));
        in_c = out_c;
    }
}

template <class T>
EncoderState<T> FrameEncoder<T>::initial_state() const {
    EncoderState<T> state;
    for (std::size_t b = 0; b < config_.encoder_blocks(); ++b) {
        const std::size_t c = config_.block_channels(b);
        state.carry.emplace_back(
            Shape{config_.block_height(b), config_.block_width(b), config_.shifted_channels(c)});
    }
    return state;
}

template <class T>
ag::Var<T> FrameEncoder<T>::forward(const ag::Var<T>& frames, EncoderState<T>& state) const {
    if (frames.value().rank() != 4 || frames.dim(1) != config_.height ||
        frames.dim(2) != config_.width || frames.dim(3) != 3) {
        throw ShapeError("encoder: frames " + shape_str(frames.shape()) + " do not match config " +
                         shape_str({config_.height, config_.width, 3}));
    }
    if (state.carry.size() != weights_.size()) throw ProtocolError("encoder: state has wrong block count");
    ag::Var<T> x = frames;
    for (std::size_t b = 0; b < weights_.size(); ++b) {
        x = ag::relu(ag::conv2d(x, weights_[b], biases_[b], 2, 1));
        const std::size_t shifted = config_.shifted_channels(config_.block_channels(b));
        Tensor<T> next = last_frame_channels(x.value(), shifted);
        x = ag::temporal_shift(x, state.carry[b], shifted);
        state.carry[b] = std::move(next);
    }
    return x;
}

template std::pair<Tensor<float>, Tensor<float>> temporal_shift(const Tensor<float>&, double, const Tensor<float>&);
template std::pair<Tensor<double>, Tensor<double>> temporal_shift(const Tensor<double>&, double, const Tensor<double>&);
template Tensor<float> spatial_squeeze_pool(const Tensor<float>&);
template Tensor<double> spatial_squeeze_pool(const Tensor<double>&);
template class FrameEncoder<float>;
template class FrameEncoder<double>;

} // namespace svtas

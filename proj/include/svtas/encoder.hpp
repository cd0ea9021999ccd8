#pragma once

#include <utility>
#include <vector>

#include "svtas/autograd.hpp"
#include "svtas/config.hpp"
#include "svtas/parameters.hpp"

namespace svtas {

// Per-block carry of the temporal shift: the shifted channels of the last
// frame seen, [h, w, shifted]. Zeros at stream start.
template <class T>
struct EncoderState {
    std::vector<Tensor<T>> carry;

    std::size_t bytes() const {
        std::size_t n = 0;
        for (const auto& c : carry) n += c.numel() * sizeof(T);
        return n;
    }
};

// Causal temporal shift of x [n, h, w, c]. The first floor(c * shift_fraction)
// channels of frame t take frame t-1's values (frame 0 takes `carry`); the
// remaining channels pass through. Returns the shifted tensor and the carry
// for the next call. ConfigError when no channel would be shifted.
template <class T>
std::pair<Tensor<T>, Tensor<T>> temporal_shift(const Tensor<T>& x, double shift_fraction,
                                               const Tensor<T>& carry);

// [n, h, w, c] -> [n, c], mean over the h*w positions of each frame.
template <class T>
Tensor<T> spatial_squeeze_pool(const Tensor<T>& x);

// Stack of {3x3 stride-2 conv, ReLU, causal temporal shift} blocks mapping
// frames [n, H, W, 3] to spatial features [n, h, w, d_i].
template <class T>
class FrameEncoder {
public:
    FrameEncoder(const ModelConfig& config, ParameterStore<T>& params, Rng& rng);

    EncoderState<T> initial_state() const;

    // Runs the blocks over n consecutive frames and advances `state`.
    ag::Var<T> forward(const ag::Var<T>& frames, EncoderState<T>& state) const;

private:
    ModelConfig config_;
    std::vector<ag::Var<T>> weights_;
    std::vector<ag::Var<T>> biases_;
};

} // namespace svtas

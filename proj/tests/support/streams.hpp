#pragma once

#include <vector>

#include "svtas/autograd.hpp"
#include "svtas/streaming.hpp"

namespace svtas::testing {

// Logits of the valid frames of a whole stream, chunk by chunk; Transeger
// prompts come from the previous chunk's predictions.
template <class T>
Tensor<T> stream_logits(const Model<T>& model, const Tensor<T>& frames) {
    const std::size_t c = model.config().num_classes;
    Tensor<T> out({frames.dim(0), c});
    StreamSession<T> session(model);
    std::size_t row = 0;
    for (const auto& chunk : chunk_video(frames, model.config().k)) {
        session.step(chunk);
        const auto& l = session.last_logits();
        std::copy_n(l.data(), chunk.valid_count * c, out.data() + row * c);
        row += chunk.valid_count;
    }
    return out;
}

// Teacher-forced stream: chunk j's prompt is labels of chunk j-1.
template <class T>
Tensor<T> teacher_forced_logits(const Model<T>& model, const Tensor<T>& frames, const LabelSequence& labels) {
    const std::size_t c = model.config().num_classes, k = model.config().k;
    Tensor<T> out({frames.dim(0), c});
    StreamSession<T> session(model);
    std::size_t row = 0;
    for (const auto& chunk : chunk_video(frames, k)) {
        if (chunk.index == 0) {
            session.step(chunk);
        } else {
            session.step_with_prompt(chunk, labels.slice((chunk.index - 1) * k, chunk.index * k));
        }
        std::copy_n(session.last_logits().data(), chunk.valid_count * c, out.data() + row * c);
        row += chunk.valid_count;
    }
    return out;
}

} // namespace svtas::testing

#pragma once

#include <span>

#include "svtas/autograd.hpp"
#include "svtas/data_model.hpp"

namespace svtas {

struct LossConfig {
    double lambda_smooth = 0.15;
    double tau_smooth = 4.0;
    double clip_temperature = 0.07;
    // ceil(T / k) of the video the chunk came from.
    std::size_t num_chunks_norm = 1;

    void validate() const;
};

// Probability floor applied before the log inside the smoothing term.
inline constexpr double kSmoothingProbFloor = 1e-8;

namespace ag {

// Mean over the first labels.size() rows of -log softmax(logits)[label].
template <class T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const ClassId> labels);

// Truncated MSE between consecutive log-probabilities of the first `rows`
// rows. The previous frame's log-probabilities come from `reference`, which
// receives no gradient; pass logits.value() for the usual stop-gradient form.
template <class T>
Var<T> truncated_mse(const Var<T>& logits, const Tensor<T>& reference, std::size_t rows, T tau);

// (CE + lambda * TMSE) / num_chunks_norm over the labelled prefix of the chunk.
template <class T>
Var<T> seg_loss(const Var<T>& logits, const LabelSequence& labels, const LossConfig& cfg);

// Symmetric InfoNCE over matching rows of two [n, d] batches:
//   logits = img * txt^T / temperature
//   loss   = (CE(rows, diag) + CE(cols, diag)) / 2
// NormalizationError for an all-zero row.
template <class T>
Var<T> clip_loss(const Var<T>& img, const Var<T>& txt, T temperature);

} // namespace ag

template <class T>
T seg_loss(const Tensor<T>& logits, const LabelSequence& labels, const LossConfig& cfg);

template <class T>
T clip_loss(const Tensor<T>& img, const Tensor<T>& txt, T temperature);

} // namespace svtas

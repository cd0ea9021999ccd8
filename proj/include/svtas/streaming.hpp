#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "svtas/data_model.hpp"
#include "svtas/model.hpp"
#include "svtas/tensor.hpp"

namespace svtas {

// One non-overlapping window of k frames [k, H, W, 3] with values in [0, 1].
// Only the last chunk of a stream may have valid_count < k; its tail is zero.
template <class T>
struct Chunk {
    Tensor<T> frames;
    std::size_t index = 0;
    std::size_t valid_count = 0;
};

// Splits [T, H, W, 3] into ceil(T / k) chunks. T == 0 gives no chunks.
template <class T>
std::vector<Chunk<T>> chunk_video(const Tensor<T>& frames, std::size_t k);

// Random-access frames of one video, decoded on demand.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::size_t frame_count() const = 0;
    virtual std::size_t height() const = 0;
    virtual std::size_t width() const = 0;
    // Writes frame i as H*W*3 interleaved RGB floats in [0, 1].
    virtual void read_frame(std::size_t i, std::span<float> out) const = 0;
};

// Number of frames left after keeping every sample_rate-th frame.
std::size_t subsampled_length(std::size_t frames, std::size_t sample_rate);

// Every sample_rate-th label (frames 0, s, 2s, ...).
LabelSequence subsample_labels(const LabelSequence& labels, std::size_t sample_rate);

// Repeats each model-rate label sample_rate times and cuts to `frames`.
LabelSequence expand_labels(const LabelSequence& labels, std::size_t sample_rate, std::size_t frames);

// Sequential chunks of the subsampled stream of a FrameSource.
class ChunkReader {
public:
    ChunkReader(const FrameSource& source, std::size_t k, std::size_t sample_rate);

    std::size_t stream_length() const { return stream_length_; }
    std::size_t chunk_count() const { return (stream_length_ + k_ - 1) / k_; }
    // Fills the next chunk; false once the stream is exhausted.
    bool next(Chunk<float>& chunk);
    // Chunk j, independent of the read cursor.
    Chunk<float> chunk(std::size_t j) const;

private:
    const FrameSource* source_;
    std::size_t k_, sample_rate_, stream_length_;
    std::size_t cursor_ = 0;
};

// Bytes of carried state, split by owner.
struct CacheFootprint {
    std::size_t tcn_bytes = 0;   // memory TCN left-padding
    std::size_t shift_bytes = 0; // temporal-shift carries
    std::size_t text_bytes = 0;  // previous-window text features
    std::size_t label_bytes = 0; // previous-window labels
    std::size_t total() const { return tcn_bytes + shift_bytes + text_bytes + label_bytes; }
    friend bool operator==(const CacheFootprint&, const CacheFootprint&) = default;
};

struct StepCost {
    double wall_time_seconds = 0;
    CacheFootprint cache;
};

// Closed forms of each footprint component for a config and variant.
CacheFootprint expected_footprint(const ModelConfig& config, Variant variant, std::size_t scalar_bytes = sizeof(float));

// Strictly sequential chunk-by-chunk inference over one stream. Single
// threaded; distinct sessions over the same model are independent.
template <class T>
class StreamSession {
public:
    explicit StreamSession(const Model<T>& model);

    // Predictions for the chunk's valid frames. Transeger prompts come from
    // the previous step's predictions (or the start-of-stream window).
    // ProtocolError for out-of-order chunks, ShapeError for wrong frame shapes.
    LabelSequence step(const Chunk<T>& chunk);

    // As step(), but the previous window is supplied (teacher forcing).
    LabelSequence step_with_prompt(const Chunk<T>& chunk, const LabelSequence& previous_window);

    StepCost measure_step_cost(const Chunk<T>& chunk);

    // Logits of the last step, all k rows.
    const Tensor<T>& last_logits() const { return last_logits_; }
    std::size_t chunks_processed() const { return state_.chunks_processed; }
    const StreamState<T>& state() const { return state_; }
    const std::optional<LabelSequence>& prev_pred_labels() const { return prev_pred_; }
    CacheFootprint footprint() const;

private:
    LabelSequence run(const Chunk<T>& chunk, const LabelSequence* prompt);

    const Model<T>* model_;
    StreamState<T> state_;
    std::optional<LabelSequence> prev_pred_;
    Tensor<T> last_logits_;
};

struct LatencyReport {
    std::size_t frames = 0;  // original-rate stream length
    std::size_t chunks = 0;  // chunks per pass over the stream
    std::size_t samples = 0; // timed steps
    double median_ms = 0;
    double p95_ms = 0;
    double mean_ms = 0;
    CacheFootprint first_cache; // after the first timed step
    CacheFootprint last_cache;  // after the last timed step
    bool constant_cache = true; // every timed step left the same footprint
};

// Streams `source` through fresh sessions until at least min_samples steps
// are timed, after `warmup` untimed steps. P95 is nearest-rank.
LatencyReport measure_stream_latency(const Model<float>& model, const FrameSource& source, std::size_t min_samples,
                                     std::size_t warmup = 2);

} // namespace svtas

namespace svtas {

// Transeger teacher-forced step: the prompt is the ground truth of the
// previous window (nullptr on the first chunk). Records a graph when
// gradients are enabled.
template <class T>
ChunkForward<T> transeger_train_step(const Model<T>& model, const Chunk<T>& chunk, StreamState<T>& state,
                                     const LabelSequence* previous_ground_truth);

// Transeger inference step: the prompt is the previous step's predictions
// (nullptr on the first chunk). Returns the chunk logits [k, C].
template <class T>
Tensor<T> transeger_infer_step(const Model<T>& model, const Chunk<T>& chunk, StreamState<T>& state,
                               const LabelSequence* previous_predictions);

} // namespace svtas

#include "svtas/streaming.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "svtas/metrics.hpp"

namespace svtas {

template <class T>
std::vector<Chunk<T>> chunk_video(const Tensor<T>& frames, std::size_t k) {
    if (k < 1) throw ConfigError("chunk_video: k must be >= 1");
    if (frames.rank() != 4) throw ShapeError("chunk_video: frames must be [T, H, W, 3], got " + shape_str(frames.shape()));
    const std::size_t total = frames.dim(0);
    const std::size_t frame_size = total ? frames.numel() / total : 0;
    std::vector<Chunk<T>> chunks;
    for (std::size_t start = 0, j = 0; start < total; start += k, ++j) {
        Chunk<T> c;
        c.index = j;
        c.valid_count = std::min(k, total - start);
        c.frames = Tensor<T>({k, frames.dim(1), frames.dim(2), frames.dim(3)});
        std::copy_n(frames.data() + start * frame_size, c.valid_count * frame_size, c.frames.data());
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::size_t subsampled_length(std::size_t frames, std::size_t sample_rate) {
    if (sample_rate < 1) throw ConfigError("sample_rate must be >= 1");
    return (frames + sample_rate - 1) / sample_rate;
}

LabelSequence subsample_labels(const LabelSequence& labels, std::size_t sample_rate) {
    std::vector<ClassId> out;
    out.reserve(subsampled_length(labels.size(), sample_rate));
    for (std::size_t i = 0; i < labels.size(); i += sample_rate) out.push_back(labels[i]);
    return LabelSequence(std::move(out), labels.num_classes());
}

LabelSequence expand_labels(const LabelSequence& labels, std::size_t sample_rate, std::size_t frames) {
    std::vector<ClassId> out(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const std::size_t src = i / sample_rate;
        if (src >= labels.size()) throw ShapeError("expand_labels: not enough model-rate labels");
        out[i] = labels[src];
    }
    return LabelSequence(std::move(out), labels.num_classes());
}

ChunkReader::ChunkReader(const FrameSource& source, std::size_t k, std::size_t sample_rate)
    : source_(&source), k_(k), sample_rate_(sample_rate),
      stream_length_(subsampled_length(source.frame_count(), sample_rate)) {
    if (k_ < 1) throw ConfigError("ChunkReader: k must be >= 1");
}

Chunk<float> ChunkReader::chunk(std::size_t j) const {
    const std::size_t h = source_->height(), w = source_->width(), frame_size = h * w * 3;
    Chunk<float> c;
    c.index = j;
    const std::size_t start = j * k_;
    if (start >= stream_length_) throw ProtocolError("ChunkReader: chunk index past the end of the stream");
    c.valid_count = std::min(k_, stream_length_ - start);
    c.frames = Tensor<float>({k_, h, w, 3});
    for (std::size_t t = 0; t < c.valid_count; ++t) {
        source_->read_frame((start + t) * sample_rate_, c.frames.values().subspan(t * frame_size, frame_size));
    }
    return c;
}

bool ChunkReader::next(Chunk<float>& chunk_out) {
    if (cursor_ >= chunk_count()) return false;
    chunk_out = chunk(cursor_++);
    return true;
}

CacheFootprint expected_footprint(const ModelConfig& config, Variant variant, std::size_t scalar_bytes) {
    CacheFootprint f;
    f.tcn_bytes = total_cache_frames(config) * config.tcn_channels * scalar_bytes;
    for (std::size_t b = 0; b < config.encoder_blocks(); ++b) {
        f.shift_bytes += config.block_height(b) * config.block_width(b) *
                         config.shifted_channels(config.block_channels(b)) * scalar_bytes;
    }
    if (variant == Variant::Transeger) {
        f.text_bytes = config.k * config.d_t * scalar_bytes;
        f.label_bytes = config.k * sizeof(ClassId);
    }
    return f;
}

template <class T>
StreamSession<T>::StreamSession(const Model<T>& model) : model_(&model), state_(model.initial_state()) {}

template <class T>
LabelSequence StreamSession<T>::run(const Chunk<T>& chunk, const LabelSequence* prompt) {
    if (chunk.index != state_.chunks_processed) {
        throw ProtocolError("stream session expected chunk " + std::to_string(state_.chunks_processed) + ", got " +
                            std::to_string(chunk.index));
    }
    const auto& cfg = model_->config();
    if (chunk.valid_count < 1 || chunk.valid_count > cfg.k) {
        throw ShapeError("chunk valid_count " + std::to_string(chunk.valid_count) + " outside [1, k]");
    }
    ag::NoGradGuard guard;
    auto out = model_->forward(chunk.frames, state_, prompt, nullptr);
    last_logits_ = out.logits.value();
    std::vector<ClassId> all = argmax_rows(last_logits_);
    prev_pred_ = LabelSequence(all, cfg.num_classes);
    all.resize(chunk.valid_count);
    return LabelSequence(std::move(all), cfg.num_classes);
}

template <class T>
LabelSequence StreamSession<T>::step(const Chunk<T>& chunk) {
    if (model_->variant() == Variant::Transeger && prev_pred_) {
        const LabelSequence prompt = *prev_pred_;
        return run(chunk, &prompt);
    }
    return run(chunk, nullptr);
}

template <class T>
LabelSequence StreamSession<T>::step_with_prompt(const Chunk<T>& chunk, const LabelSequence& previous_window) {
    return run(chunk, &previous_window);
}

template <class T>
CacheFootprint StreamSession<T>::footprint() const {
    CacheFootprint f;
    f.tcn_bytes = state_.tcn.bytes();
    f.shift_bytes = state_.encoder.bytes();
    f.text_bytes = state_.prev_text.numel() * sizeof(T);
    if (model_->variant() == Variant::Transeger) f.label_bytes = model_->config().k * sizeof(ClassId);
    return f;
}

template <class T>
StepCost StreamSession<T>::measure_step_cost(const Chunk<T>& chunk) {
    const auto t0 = std::chrono::steady_clock::now();
    step(chunk);
    const auto t1 = std::chrono::steady_clock::now();
    return {std::chrono::duration<double>(t1 - t0).count(), footprint()};
}

LatencyReport measure_stream_latency(const Model<float>& model, const FrameSource& source, std::size_t min_samples,
                                     std::size_t warmup) {
    const auto& cfg = model.config();
    ChunkReader reader(source, cfg.k, cfg.sample_rate);
    LatencyReport r;
    r.frames = source.frame_count();
    r.chunks = reader.chunk_count();
    if (r.chunks == 0) throw DataError("measure_stream_latency: empty stream");
    std::vector<double> ms;
    std::size_t untimed = 0;
    while (ms.size() < min_samples) {
        StreamSession<float> session(model);
        for (std::size_t j = 0; j < r.chunks && ms.size() < min_samples; ++j) {
            const Chunk<float> chunk = reader.chunk(j);
            const StepCost cost = session.measure_step_cost(chunk);
            if (untimed < warmup) {
                ++untimed;
                continue;
            }
            if (ms.empty()) r.first_cache = cost.cache;
            if (!(cost.cache == r.first_cache)) r.constant_cache = false;
            r.last_cache = cost.cache;
            ms.push_back(cost.wall_time_seconds * 1e3);
        }
    }
    r.samples = ms.size();
    r.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / double(ms.size());
    std::sort(ms.begin(), ms.end());
    r.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
    const std::size_t rank = std::size_t(std::ceil(0.95 * double(ms.size())));
    r.p95_ms = ms[std::max<std::size_t>(rank, 1) - 1];
    return r;
}

template std::vector<Chunk<float>> chunk_video(const Tensor<float>&, std::size_t);
template std::vector<Chunk<double>> chunk_video(const Tensor<double>&, std::size_t);
template class StreamSession<float>;
template class StreamSession<double>;

} // namespace svtas

namespace svtas {

namespace {

template <class T>
void check_step(const Model<T>& model, const Chunk<T>& chunk, const StreamState<T>& state) {
    if (model.variant() != Variant::Transeger) throw UsageError("transeger step on a " + variant_name(model.variant()) + " model");
    if (chunk.index != state.chunks_processed)
        throw ProtocolError("expected chunk " + std::to_string(state.chunks_processed) + ", got " + std::to_string(chunk.index));
}

} // namespace

template <class T>
ChunkForward<T> transeger_train_step(const Model<T>& model, const Chunk<T>& chunk, StreamState<T>& state,
                                     const LabelSequence* previous_ground_truth) {
    check_step(model, chunk, state);
    return model.forward(chunk.frames, state, previous_ground_truth, nullptr);
}

template <class T>
Tensor<T> transeger_infer_step(const Model<T>& model, const Chunk<T>& chunk, StreamState<T>& state,
                               const LabelSequence* previous_predictions) {
    check_step(model, chunk, state);
    ag::NoGradGuard guard;
    return model.forward(chunk.frames, state, previous_predictions, nullptr).logits.value();
}

template ChunkForward<float> transeger_train_step(const Model<float>&, const Chunk<float>&, StreamState<float>&,
                                                  const LabelSequence*);
template ChunkForward<double> transeger_train_step(const Model<double>&, const Chunk<double>&, StreamState<double>&,
                                                   const LabelSequence*);
template Tensor<float> transeger_infer_step(const Model<float>&, const Chunk<float>&, StreamState<float>&,
                                            const LabelSequence*);
template Tensor<double> transeger_infer_step(const Model<double>&, const Chunk<double>&, StreamState<double>&,
                                             const LabelSequence*);

} // namespace svtas

#include "svtas/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "svtas/optimizer.hpp"
#include "svtas/streaming.hpp"

namespace svtas {

std::vector<PreparedVideo> prepare_videos(const DatasetIndex& index, const ModelConfig& config) {
    if (index.class_names.size() != config.num_classes)
        throw DataError("dataset has " + std::to_string(index.class_names.size()) + " classes, config expects " +
                        std::to_string(config.num_classes));
    std::vector<PreparedVideo> out;
    for (const auto& v : index.videos) {
        if (v.frames->height() != config.height || v.frames->width() != config.width)
            throw DataError(v.id + ": frames are " + std::to_string(v.frames->height()) + "x" +
                            std::to_string(v.frames->width()) + ", config expects " + std::to_string(config.height) +
                            "x" + std::to_string(config.width));
        if (v.frames->frame_count() != v.labels.size())
            throw DataError(v.id + ": frame count does not match label count");
        PreparedVideo p;
        p.id = v.id;
        p.frames = load_frames(*v.frames, config.sample_rate);
        p.labels = subsample_labels(v.labels, config.sample_rate);
        p.full_labels = v.labels;
        out.push_back(std::move(p));
    }
    return out;
}

LossConfig loss_config(const ModelConfig& config, std::size_t num_chunks) {
    LossConfig c;
    c.lambda_smooth = config.lambda_smooth;
    c.tau_smooth = config.tau_smooth;
    c.clip_temperature = config.clip_temperature;
    c.num_chunks_norm = std::max<std::size_t>(1, num_chunks);
    return c;
}

namespace {

// Per-video streaming state during one training batch.
struct Lane {
    const PreparedVideo* video;
    std::vector<Chunk<float>> chunks;
    StreamState<float> state;
};

bool uses_clip(const Model<float>& model) {
    return model.has_contrastive_heads();
}

ag::Var<float> chunk_loss(const Model<float>& model, Lane& lane, std::size_t j, std::vector<ClassId>& pred_out) {
    const auto& cfg = model.config();
    const Chunk<float>& chunk = lane.chunks[j];
    const LabelSequence window = lane.video->labels.slice(j * cfg.k, j * cfg.k + chunk.valid_count);
    std::optional<LabelSequence> prompt;
    if (model.variant() == Variant::Transeger && j > 0)
        prompt = lane.video->labels.slice((j - 1) * cfg.k, j * cfg.k);
    const bool clip = uses_clip(model);
    auto out = model.forward(chunk.frames, lane.state, prompt ? &*prompt : nullptr, clip ? &window : nullptr);
    const LossConfig lc = loss_config(cfg, lane.chunks.size());
    auto loss = ag::seg_loss(out.logits, window, lc);
    if (clip) {
        auto img = out.image_proj, txt = out.text_proj;
        if (chunk.valid_count < cfg.k) {
            std::vector<std::size_t> rows(chunk.valid_count);
            std::iota(rows.begin(), rows.end(), 0);
            img = ag::gather_rows(img, std::span<const std::size_t>(rows));
            txt = ag::gather_rows(txt, std::span<const std::size_t>(rows));
        }
        auto c = ag::clip_loss(img, txt, float(cfg.clip_temperature));
        loss = ag::add(loss, ag::scale(c, float(cfg.clip_weight / double(lc.num_chunks_norm))));
    }
    auto pred = argmax_rows(out.logits.value());
    pred_out.insert(pred_out.end(), pred.begin(), pred.begin() + std::ptrdiff_t(chunk.valid_count));
    return loss;
}

double accuracy_of(const ModelEvaluation& e) {
    return e.metrics.acc;
}

} // namespace

TrainResult train_model(Model<float>& model, const std::vector<PreparedVideo>& videos, const TrainOptions& options) {
    const auto& cfg = model.config();
    if (videos.empty()) throw DataError("no training videos");
    Adam<float> adam(model.parameters(), {cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
    const std::string hash = options.config_hash.empty() ? config_hash(nlohmann::json(cfg)) : options.config_hash;
    Rng rng(options.seed ^ 0x7A11EDull);
    std::vector<std::size_t> order(videos.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            std::vector<Lane> lanes;
            for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i) {
                const auto& v = videos[order[i]];
                lanes.push_back({&v, chunk_video(v.frames, cfg.k), model.initial_state()});
            }
            std::size_t max_chunks = 0;
            for (const auto& l : lanes) max_chunks = std::max(max_chunks, l.chunks.size());
            for (std::size_t j = 0; j < max_chunks; ++j) {
                adam.zero_grad();
                std::size_t active = 0;
                for (auto& lane : lanes) {
                    if (j >= lane.chunks.size()) continue;
                    std::vector<ClassId> pred;
                    auto loss = chunk_loss(model, lane, j, pred);
                    loss_sum += double(loss.value()[0]);
                    ag::backward(loss);
                    ++active;
                }
                adam.step(1.0 / double(active));
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.step = adam.steps();
        stats.loss = loss_sum / double(videos.size());
        const bool transeger = model.variant() == Variant::Transeger;
        stats.accuracy = accuracy_of(evaluate_model(model, videos, transeger ? DecodeMode::TeacherForced
                                                                                : DecodeMode::Autoregressive));
        if (transeger) stats.autoregressive_accuracy = accuracy_of(evaluate_model(model, videos, DecodeMode::Autoregressive));
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.epochs.push_back(stats);

        if (options.log) {
            nlohmann::json line = {{"epoch", stats.epoch},
                                   {"step", stats.step},
                                   {"loss", stats.loss},
                                   {"acc", stats.accuracy},
                                   {"seconds", stats.seconds},
                                   {"variant", variant_name(model.variant())},
                                   {"config_hash", hash}};
            if (stats.autoregressive_accuracy) {
                line["teacher_forced_acc"] = stats.accuracy;
                line["autoregressive_acc"] = *stats.autoregressive_accuracy;
            }
            *options.log << line.dump() << '\n' << std::flush;
        }
        const bool ar_ok = !stats.autoregressive_accuracy || *stats.autoregressive_accuracy >= options.stop_autoregressive_accuracy;
        if (stats.accuracy >= options.stop_accuracy && ar_ok) break;
    }
    return result;
}

VideoPrediction predict_video(const Model<float>& model, const PreparedVideo& video, DecodeMode mode) {
    const auto& cfg = model.config();
    StreamSession<float> session(model);
    VideoPrediction out;
    out.id = video.id;
    out.logits = Tensor<float>({video.labels.size(), cfg.num_classes});
    std::vector<ClassId> labels;
    const auto chunks = chunk_video(video.frames, cfg.k);
    for (std::size_t j = 0; j < chunks.size(); ++j) {
        LabelSequence pred;
        if (mode == DecodeMode::TeacherForced && model.variant() == Variant::Transeger && j > 0) {
            pred = session.step_with_prompt(chunks[j], video.labels.slice((j - 1) * cfg.k, j * cfg.k));
        } else {
            pred = session.step(chunks[j]);
        }
        labels.insert(labels.end(), pred.begin(), pred.end());
        const auto& logits = session.last_logits();
        std::copy_n(logits.data(), chunks[j].valid_count * cfg.num_classes,
                    out.logits.data() + j * cfg.k * cfg.num_classes);
    }
    out.labels = LabelSequence(std::move(labels), cfg.num_classes);
    out.full_labels = expand_labels(out.labels, cfg.sample_rate, video.full_labels.size());
    return out;
}

VideoEvaluation to_evaluation(const VideoPrediction& prediction, const PreparedVideo& video, std::size_t sample_rate) {
    VideoEvaluation e;
    e.video = video.id;
    e.prediction = prediction.full_labels;
    e.ground_truth = video.full_labels;
    const std::size_t total = video.full_labels.size();
    for (auto seg : segments_from_predictions(prediction.logits)) {
        seg.start = std::min(total, seg.start * sample_rate);
        seg.end = std::min(total, seg.end * sample_rate);
        if (seg.end > seg.start) e.proposals.push_back(seg);
    }
    return e;
}

ModelEvaluation evaluate_model(const Model<float>& model, const std::vector<PreparedVideo>& videos, DecodeMode mode,
                               const MetricOptions& opts) {
    ModelEvaluation out;
    std::vector<VideoEvaluation> evals;
    for (const auto& v : videos) {
        out.predictions.push_back(predict_video(model, v, mode));
        evals.push_back(to_evaluation(out.predictions.back(), v, model.config().sample_rate));
    }
    out.metrics = evaluate(evals, opts);
    return out;
}

} // namespace svtas

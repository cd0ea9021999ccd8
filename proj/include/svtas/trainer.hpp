#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "svtas/datasets.hpp"
#include "svtas/losses.hpp"
#include "svtas/metrics.hpp"
#include "svtas/model.hpp"

namespace svtas {

// A video resampled to the model rate and held in memory.
struct PreparedVideo {
    std::string id;
    Tensor<float> frames;      // [T', H, W, 3]
    LabelSequence labels;      // model rate, length T'
    LabelSequence full_labels; // original rate
    std::size_t chunk_count(std::size_t k) const { return (labels.size() + k - 1) / k; }
};

// DataError when the dataset's frame size or class count differs from the config.
std::vector<PreparedVideo> prepare_videos(const DatasetIndex& index, const ModelConfig& config);

struct TrainOptions {
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    // Stop once the end-of-epoch training-set accuracy reaches this value
    // (autoregressive accuracy too, for Transeger). Values above 1 never stop.
    double stop_accuracy = 2.0;
    double stop_autoregressive_accuracy = 2.0;
    std::ostream* log = nullptr; // JSON lines
    std::string config_hash;     // recorded in every log line; defaults to the model config hash
};

struct EpochStats {
    std::size_t epoch = 0;
    std::size_t step = 0; // optimizer steps so far
    double loss = 0;      // mean per-video loss
    double accuracy = 0;  // streamed training-set accuracy (teacher forced for Transeger)
    std::optional<double> autoregressive_accuracy;
    double seconds = 0;
};

struct TrainResult {
    std::vector<EpochStats> epochs;
    double final_loss() const { return epochs.empty() ? 0.0 : epochs.back().loss; }
};

// Chunk-by-chunk training with truncated gradients at chunk boundaries. Each
// optimizer step accumulates chunk j of batch_size videos. Deterministic for a
// given model initialisation and seed.
TrainResult train_model(Model<float>& model, const std::vector<PreparedVideo>& videos, const TrainOptions& options);

enum class DecodeMode { Autoregressive, TeacherForced };

struct VideoPrediction {
    std::string id;
    Tensor<float> logits;      // [T', C]
    LabelSequence labels;      // model rate
    LabelSequence full_labels; // expanded to the original rate
};

// Streams one video through a fresh session.
VideoPrediction predict_video(const Model<float>& model, const PreparedVideo& video, DecodeMode mode);

// Proposals are rescaled to the original frame rate.
VideoEvaluation to_evaluation(const VideoPrediction& prediction, const PreparedVideo& video, std::size_t sample_rate);

struct ModelEvaluation {
    EvalResult metrics;
    std::vector<VideoPrediction> predictions;
};

ModelEvaluation evaluate_model(const Model<float>& model, const std::vector<PreparedVideo>& videos, DecodeMode mode,
                               const MetricOptions& opts = {});

LossConfig loss_config(const ModelConfig& config, std::size_t num_chunks);

} // namespace svtas

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "svtas/data_model.hpp"
#include "svtas/tensor.hpp"

namespace svtas {

struct MetricOptions {
    // Drop background frames / segments from every metric.
    bool exclude_background = false;
};

// Fraction of frames where pred == gt. DataError on length mismatch.
double frame_accuracy(const LabelSequence& pred, const LabelSequence& gt, const MetricOptions& opts = {});

struct F1Counts {
    double tp = 0, fp = 0, fn = 0;
    double f1() const { return tp + fp + fn > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 1.0; }
};

// Segmental matching in predicted-segment order: each predicted segment takes
// the unmatched ground-truth segment of its class with the highest IoU; a TP
// when that IoU >= threshold, otherwise a FP. Leftover ground truth is FN.
F1Counts segmental_f1_counts(const LabelSequence& pred, const LabelSequence& gt, double iou_threshold,
                             const MetricOptions& opts = {});
double segmental_f1(const LabelSequence& pred, const LabelSequence& gt, double iou_threshold,
                    const MetricOptions& opts = {});

// One video's scored proposals and ground truth.
struct ProposalSet {
    SegmentList predictions; // confidence in [0, 1]
    SegmentList ground_truth;
};

// Per class: predictions by descending confidence matched greedily to the
// unmatched same-video ground truth with the highest IoU (>= iou), AP by
// all-points interpolation; mean over classes present in the ground truth.
double map_at_iou(const std::vector<ProposalSet>& videos, double iou = 0.5, const MetricOptions& opts = {});
double map_at_iou(const SegmentList& predictions, const SegmentList& gt, double iou = 0.5,
                  const MetricOptions& opts = {});

// Class-agnostic recall of ground truth by the top-AN proposals of each video,
// averaged over IoU thresholds 0.50:0.05:0.95, integrated over an ascending
// AN grid with the trapezoid rule and divided by the grid span. A one-point
// grid returns that point's average recall.
double ar_an_auc(const std::vector<ProposalSet>& videos, const std::vector<std::size_t>& an_grid,
                 const MetricOptions& opts = {});
double ar_an_auc(const SegmentList& predictions, const SegmentList& gt, const std::vector<std::size_t>& an_grid,
                 const MetricOptions& opts = {});

std::vector<std::size_t> default_an_grid(); // 1..100
std::vector<double> recall_iou_thresholds(); // 0.50, 0.55, ..., 0.95

// Run-length segments of the per-frame argmax (ties to the lowest class);
// confidence is the mean softmax probability of the segment's class.
template <class T>
SegmentList segments_from_predictions(const Tensor<T>& logits);

// argmax per row, lowest class id on ties.
template <class T>
std::vector<ClassId> argmax_rows(const Tensor<T>& logits);

struct VideoEvaluation {
    std::string video;
    LabelSequence prediction;
    LabelSequence ground_truth;
    SegmentList proposals; // scored segments; confidence 1.0 when no logits are available
};

struct VideoMetrics {
    std::string video;
    double acc = 0;
    std::map<std::string, double> f1;
    double map50 = 0;
    double auc = 0;
};

struct EvalResult {
    double acc = 0;
    std::map<std::string, double> f1; // keyed "0.1", "0.25", "0.5"
    double map50 = 0;
    double auc = 0;
    std::vector<VideoMetrics> per_video;

    nlohmann::json to_json() const;
};

// Aggregates over videos: Acc over all frames, F1 from summed TP/FP/FN,
// mAP pooled across videos per class, AUC over per-video proposal sets.
EvalResult evaluate(const std::vector<VideoEvaluation>& videos, const MetricOptions& opts = {},
                    const std::vector<std::size_t>& an_grid = default_an_grid());

} // namespace svtas

#include "svtas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "svtas/errors.hpp"

namespace svtas {

namespace {

void require_same_length(const LabelSequence& pred, const LabelSequence& gt, const char* what) {
    if (pred.size() != gt.size()) {
        throw DataError(std::string(what) + ": prediction has " + std::to_string(pred.size()) +
                        " frames, ground truth has " + std::to_string(gt.size()));
    }
}

SegmentList filter_background(SegmentList segs, const MetricOptions& opts) {
    if (!opts.exclude_background) return segs;
    std::erase_if(segs, [](const ActionSegment& s) { return s.class_id == kBackgroundClass; });
    return segs;
}

std::string threshold_key(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

const std::vector<double> kF1Thresholds{0.1, 0.25, 0.5};

} // namespace

double frame_accuracy(const LabelSequence& pred, const LabelSequence& gt, const MetricOptions& opts) {
    require_same_length(pred, gt, "frame_accuracy");
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (opts.exclude_background && gt[i] == kBackgroundClass) continue;
        ++total;
        if (pred[i] == gt[i]) ++correct;
    }
    return total ? double(correct) / double(total) : 1.0;
}

F1Counts segmental_f1_counts(const LabelSequence& pred, const LabelSequence& gt, double iou_threshold,
                             const MetricOptions& opts) {
    require_same_length(pred, gt, "segmental_f1");
    const SegmentList p = filter_background(run_length_encode(pred), opts);
    const SegmentList g = filter_background(run_length_encode(gt), opts);
    std::vector<bool> used(g.size(), false);
    F1Counts counts;
    for (const auto& ps : p) {
        double best = -1.0;
        std::size_t best_idx = g.size();
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (used[j] || g[j].class_id != ps.class_id) continue;
            const double iou = segment_iou(ps, g[j]);
            if (iou > best) {
                best = iou;
                best_idx = j;
            }
        }
        if (best_idx < g.size() && best >= iou_threshold) {
            counts.tp += 1;
            used[best_idx] = true;
        } else {
            counts.fp += 1;
        }
    }
    counts.fn = double(std::count(used.begin(), used.end(), false));
    return counts;
}

double segmental_f1(const LabelSequence& pred, const LabelSequence& gt, double iou_threshold,
                    const MetricOptions& opts) {
    return segmental_f1_counts(pred, gt, iou_threshold, opts).f1();
}

double map_at_iou(const std::vector<ProposalSet>& videos, double iou, const MetricOptions& opts) {
    std::vector<SegmentList> preds, gts;
    for (const auto& v : videos) {
        preds.push_back(filter_background(v.predictions, opts));
        gts.push_back(filter_background(v.ground_truth, opts));
    }
    std::vector<ClassId> classes;
    for (const auto& g : gts)
        for (const auto& s : g) classes.push_back(s.class_id);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.empty()) {
        const bool any_pred = std::any_of(preds.begin(), preds.end(), [](const auto& p) { return !p.empty(); });
        return any_pred ? 0.0 : 1.0;
    }

    double sum_ap = 0.0;
    for (ClassId c : classes) {
        struct Candidate {
            std::size_t video;
            ActionSegment seg;
        };
        std::vector<Candidate> cands;
        std::size_t n_gt = 0;
        std::vector<std::vector<bool>> used(gts.size());
        for (std::size_t v = 0; v < gts.size(); ++v) {
            used[v].assign(gts[v].size(), false);
            for (const auto& s : gts[v]) n_gt += s.class_id == c;
            for (const auto& s : preds[v])
                if (s.class_id == c) cands.push_back({v, s});
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return a.seg.confidence > b.seg.confidence; });
        std::vector<double> precision, recall;
        double tp = 0, fp = 0;
        for (const auto& cand : cands) {
            const auto& g = gts[cand.video];
            double best = -1.0;
            std::size_t best_idx = g.size();
            for (std::size_t j = 0; j < g.size(); ++j) {
                if (g[j].class_id != c || used[cand.video][j]) continue;
                const double o = segment_iou(cand.seg, g[j]);
                if (o > best) {
                    best = o;
                    best_idx = j;
                }
            }
            if (best_idx < g.size() && best >= iou) {
                used[cand.video][best_idx] = true;
                tp += 1;
            } else {
                fp += 1;
            }
            precision.push_back(tp / (tp + fp));
            recall.push_back(tp / double(n_gt));
        }
        // All-points interpolation.
        std::vector<double> mprec{0.0}, mrec{0.0};
        mprec.insert(mprec.end(), precision.begin(), precision.end());
        mrec.insert(mrec.end(), recall.begin(), recall.end());
        mprec.push_back(0.0);
        mrec.push_back(1.0);
        for (std::size_t i = mprec.size() - 1; i-- > 0;) mprec[i] = std::max(mprec[i], mprec[i + 1]);
        double ap = 0.0;
        for (std::size_t i = 1; i < mrec.size(); ++i)
            if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mprec[i];
        sum_ap += ap;
    }
    return sum_ap / double(classes.size());
}

double map_at_iou(const SegmentList& predictions, const SegmentList& gt, double iou, const MetricOptions& opts) {
    return map_at_iou(std::vector<ProposalSet>{{predictions, gt}}, iou, opts);
}

std::vector<std::size_t> default_an_grid() {
    std::vector<std::size_t> grid(100);
    std::iota(grid.begin(), grid.end(), std::size_t{1});
    return grid;
}

std::vector<double> recall_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
    return t;
}

double ar_an_auc(const std::vector<ProposalSet>& videos, const std::vector<std::size_t>& an_grid,
                 const MetricOptions& opts) {
    if (an_grid.empty()) throw ConfigError("ar_an_auc: empty AN grid");
    for (std::size_t i = 1; i < an_grid.size(); ++i)
        if (an_grid[i] <= an_grid[i - 1]) throw ConfigError("ar_an_auc: AN grid must be strictly ascending");
    std::vector<SegmentList> props, gts;
    std::size_t total_gt = 0;
    for (const auto& v : videos) {
        SegmentList p = filter_background(v.predictions, opts);
        std::stable_sort(p.begin(), p.end(),
                         [](const ActionSegment& a, const ActionSegment& b) { return a.confidence > b.confidence; });
        props.push_back(std::move(p));
        gts.push_back(filter_background(v.ground_truth, opts));
        total_gt += gts.back().size();
    }
    if (total_gt == 0) return 0.0;
    const auto thresholds = recall_iou_thresholds();
    std::vector<double> ar(an_grid.size(), 0.0);
    for (std::size_t a = 0; a < an_grid.size(); ++a) {
        double recall_sum = 0.0;
        for (double thr : thresholds) {
            std::size_t matched = 0;
            for (std::size_t v = 0; v < gts.size(); ++v) {
                const std::size_t top = std::min(an_grid[a], props[v].size());
                for (const auto& g : gts[v]) {
                    for (std::size_t i = 0; i < top; ++i) {
                        if (segment_iou(props[v][i], g) >= thr) {
                            ++matched;
                            break;
                        }
                    }
                }
            }
            recall_sum += double(matched) / double(total_gt);
        }
        ar[a] = recall_sum / double(thresholds.size());
    }
    if (an_grid.size() == 1) return ar[0];
    double area = 0.0;
    for (std::size_t a = 1; a < an_grid.size(); ++a)
        area += 0.5 * (ar[a] + ar[a - 1]) * double(an_grid[a] - an_grid[a - 1]);
    return area / double(an_grid.back() - an_grid.front());
}

double ar_an_auc(const SegmentList& predictions, const SegmentList& gt, const std::vector<std::size_t>& an_grid,
                 const MetricOptions& opts) {
    return ar_an_auc(std::vector<ProposalSet>{{predictions, gt}}, an_grid, opts);
}

template <class T>
std::vector<ClassId> argmax_rows(const Tensor<T>& logits) {
    if (logits.rank() != 2) throw ShapeError("argmax_rows: logits must be [n, C]");
    const std::size_t n = logits.dim(0), c = logits.dim(1);
    std::vector<ClassId> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j)
            if (logits[i * c + j] > logits[i * c + best]) best = j;
        out[i] = ClassId(best);
    }
    return out;
}

template <class T>
SegmentList segments_from_predictions(const Tensor<T>& logits) {
    const std::size_t c = logits.rank() == 2 ? logits.dim(1) : 0;
    const auto labels = argmax_rows(logits);
    SegmentList segs = run_length_encode(LabelSequence(labels, std::max<std::size_t>(c, 1)));
    for (auto& s : segs) {
        double sum = 0.0;
        for (std::size_t t = s.start; t < s.end; ++t) {
            const T* r = logits.data() + t * c;
            const double mx = double(*std::max_element(r, r + c));
            double z = 0.0;
            for (std::size_t j = 0; j < c; ++j) z += std::exp(double(r[j]) - mx);
            sum += std::exp(double(r[std::size_t(s.class_id)]) - mx) / z;
        }
        s.confidence = sum / double(s.length());
    }
    return segs;
}

nlohmann::json EvalResult::to_json() const {
    nlohmann::json j;
    j["acc"] = acc;
    j["f1"] = f1;
    j["map50"] = map50;
    j["auc"] = auc;
    j["per_video"] = nlohmann::json::array();
    for (const auto& v : per_video) {
        j["per_video"].push_back({{"video", v.video}, {"acc", v.acc}, {"f1", v.f1}, {"map50", v.map50}, {"auc", v.auc}});
    }
    return j;
}

EvalResult evaluate(const std::vector<VideoEvaluation>& videos, const MetricOptions& opts,
                    const std::vector<std::size_t>& an_grid) {
    EvalResult result;
    std::size_t correct = 0, total = 0;
    std::vector<F1Counts> f1_sum(kF1Thresholds.size());
    std::vector<ProposalSet> sets;
    for (const auto& v : videos) {
        require_same_length(v.prediction, v.ground_truth, "evaluate");
        VideoMetrics vm;
        vm.video = v.video;
        for (std::size_t i = 0; i < v.ground_truth.size(); ++i) {
            if (opts.exclude_background && v.ground_truth[i] == kBackgroundClass) continue;
            ++total;
            correct += v.prediction[i] == v.ground_truth[i];
        }
        vm.acc = frame_accuracy(v.prediction, v.ground_truth, opts);
        for (std::size_t t = 0; t < kF1Thresholds.size(); ++t) {
            const F1Counts c = segmental_f1_counts(v.prediction, v.ground_truth, kF1Thresholds[t], opts);
            f1_sum[t].tp += c.tp;
            f1_sum[t].fp += c.fp;
            f1_sum[t].fn += c.fn;
            vm.f1[threshold_key(kF1Thresholds[t])] = c.f1();
        }
        ProposalSet set{v.proposals, run_length_encode(v.ground_truth)};
        vm.map50 = map_at_iou(std::vector<ProposalSet>{set}, 0.5, opts);
        vm.auc = ar_an_auc(std::vector<ProposalSet>{set}, an_grid, opts);
        sets.push_back(std::move(set));
        result.per_video.push_back(std::move(vm));
    }
    result.acc = total ? double(correct) / double(total) : 1.0;
    for (std::size_t t = 0; t < kF1Thresholds.size(); ++t) result.f1[threshold_key(kF1Thresholds[t])] = f1_sum[t].f1();
    result.map50 = map_at_iou(sets, 0.5, opts);
    result.auc = ar_an_auc(sets, an_grid, opts);
    return result;
}

template SegmentList segments_from_predictions(const Tensor<float>&);
template SegmentList segments_from_predictions(const Tensor<double>&);
template std::vector<ClassId> argmax_rows(const Tensor<float>&);
template std::vector<ClassId> argmax_rows(const Tensor<double>&);

} // namespace svtas

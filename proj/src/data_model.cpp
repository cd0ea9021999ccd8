#include "svtas/data_model.hpp"

#include <algorithm>
#include <string>

#include "svtas/errors.hpp"

namespace svtas {

LabelSequence::LabelSequence(std::vector<ClassId> labels, std::size_t num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
    if (num_classes_ == 0) throw DataError("label sequence needs at least one class");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || std::size_t(labels_[i]) >= num_classes_) {
            throw DataError("label " + std::to_string(labels_[i]) + " at frame " +
                            std::to_string(i) + " outside [0, " + std::to_string(num_classes_) +
                            ")");
        }
    }
}

LabelSequence LabelSequence::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, labels_.size());
    begin = std::min(begin, end);
    return LabelSequence(std::vector<ClassId>(labels_.begin() + long(begin), labels_.begin() + long(end)),
                         num_classes_);
}

SegmentList run_length_encode(const LabelSequence& labels) {
    SegmentList out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (out.empty() || out.back().class_id != labels[i]) {
            out.push_back({labels[i], i, i + 1, 1.0});
        } else {
            out.back().end = i + 1;
        }
    }
    return out;
}

LabelSequence segments_to_labels(const SegmentList& segments, std::size_t length,
                                 std::size_t num_classes) {
    std::vector<ClassId> labels;
    labels.reserve(length);
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.start != cursor) {
            throw StructuralError(std::string(seg.start > cursor ? "gap" : "overlap") +
                                  " before segment " + std::to_string(s) + " at frame " +
                                  std::to_string(cursor));
        }
        if (seg.end <= seg.start) {
            throw StructuralError("empty segment " + std::to_string(s));
        }
        if (seg.class_id < 0 || std::size_t(seg.class_id) >= num_classes) {
            throw StructuralError("segment " + std::to_string(s) + " has class " +
                                  std::to_string(seg.class_id) + " outside the class range");
        }
        labels.insert(labels.end(), seg.length(), seg.class_id);
        cursor = seg.end;
    }
    if (cursor != length) {
        throw StructuralError("segments cover " + std::to_string(cursor) + " frames, expected " +
                              std::to_string(length));
    }
    return LabelSequence(std::move(labels), num_classes);
}

double segment_iou(const ActionSegment& a, const ActionSegment& b) {
    const double lo = double(std::max(a.start, b.start));
    const double hi = double(std::min(a.end, b.end));
    const double inter = std::max(0.0, hi - lo);
    const double uni = double(a.length()) + double(b.length()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

} // namespace svtas

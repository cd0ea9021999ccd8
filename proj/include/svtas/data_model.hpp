#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svtas {

using ClassId = int;

// Reserved class id for "no action" frames in synthetic data and padding.
inline constexpr ClassId kBackgroundClass = 0;

// Per-frame class ids over a fixed number of classes.
class LabelSequence {
public:
    LabelSequence() = default;
    // Throws DataError if any label is outside [0, num_classes).
    LabelSequence(std::vector<ClassId> labels, std::size_t num_classes);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    ClassId operator[](std::size_t i) const noexcept { return labels_[i]; }
    std::span<const ClassId> values() const noexcept { return labels_; }
    auto begin() const noexcept { return labels_.begin(); }
    auto end() const noexcept { return labels_.end(); }

    // Frames [begin, end) as a new sequence.
    LabelSequence slice(std::size_t begin, std::size_t end) const;

    friend bool operator==(const LabelSequence&, const LabelSequence&) = default;

private:
    std::vector<ClassId> labels_;
    std::size_t num_classes_ = 1;
};

// Half-open frame interval [start, end) carrying one class.
struct ActionSegment {
    ClassId class_id = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    double confidence = 1.0;

    std::size_t length() const noexcept { return end - start; }
    friend bool operator==(const ActionSegment&, const ActionSegment&) = default;
};

using SegmentList = std::vector<ActionSegment>;

// Maximal runs of equal labels, in frame order.
SegmentList run_length_encode(const LabelSequence& labels);

// Inverse of run_length_encode. Segments must tile [0, length) in order;
// gaps, overlaps or out-of-range classes raise StructuralError.
LabelSequence segments_to_labels(const SegmentList& segments, std::size_t length,
                                 std::size_t num_classes);

// Temporal IoU of two half-open intervals.
double segment_iou(const ActionSegment& a, const ActionSegment& b);

} // namespace svtas

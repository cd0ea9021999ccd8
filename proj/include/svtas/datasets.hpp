#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "svtas/data_model.hpp"
#include "svtas/streaming.hpp"

namespace svtas {

struct SyntheticSpec {
    std::size_t num_videos = 20;
    std::size_t frames_per_video = 256;
    std::size_t height = 48;
    std::size_t width = 48;
    std::size_t num_classes = 5; // includes background (class 0)
    std::size_t min_segment = 24;
    std::size_t max_segment = 64;
    std::uint64_t seed = 0;

    // ConfigError unless every video can be tiled with segments in [min, max].
    void validate() const;
    // "default" (20 x 256 frames) or "tiny" (4 x 64 frames, for tests).
    static SyntheticSpec preset(const std::string& name);
};

// Frames held in memory as 8-bit RGB [T, H, W, 3].
class MemoryFrameSource final : public FrameSource {
public:
    MemoryFrameSource(std::size_t frames, std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels);

    std::size_t frame_count() const override { return frames_; }
    std::size_t height() const override { return height_; }
    std::size_t width() const override { return width_; }
    void read_frame(std::size_t i, std::span<float> out) const override;
    std::span<const std::uint8_t> frame_bytes(std::size_t i) const;

private:
    std::size_t frames_, height_, width_;
    std::vector<std::uint8_t> pixels_;
};

// frames/<video>/frame_%06d.png, decoded on each read.
class PngDirectorySource final : public FrameSource {
public:
    PngDirectorySource(std::filesystem::path dir, std::size_t frames, std::size_t first_index);

    std::size_t frame_count() const override { return frames_; }
    std::size_t height() const override { return height_; }
    std::size_t width() const override { return width_; }
    void read_frame(std::size_t i, std::span<float> out) const override;
    std::filesystem::path frame_path(std::size_t i) const;

private:
    std::filesystem::path dir_;
    std::size_t frames_, first_index_, height_ = 0, width_ = 0;
};

// Procedural noise frames of any length without storing them; frame i is a
// pure function of (seed, i).
class NoiseFrameSource final : public FrameSource {
public:
    NoiseFrameSource(std::size_t frames, std::size_t height, std::size_t width, std::uint64_t seed)
        : frames_(frames), height_(height), width_(width), seed_(seed) {}

    std::size_t frame_count() const override { return frames_; }
    std::size_t height() const override { return height_; }
    std::size_t width() const override { return width_; }
    void read_frame(std::size_t i, std::span<float> out) const override;

private:
    std::size_t frames_, height_, width_;
    std::uint64_t seed_;
};

struct Video {
    std::string id;
    std::shared_ptr<const FrameSource> frames;
    LabelSequence labels; // one per original frame
};

// Read-only after construction.
struct DatasetIndex {
    std::vector<std::string> class_names; // index == class id
    std::vector<Video> videos;            // sorted by id
};

DatasetIndex generate_synthetic(const SyntheticSpec& spec);

// Loads mapping.txt, groundTruth/<video>.txt and frames/<video>/frame_%06d.png
// (numbered from 0 or 1). DataError names the offending file and line.
DatasetIndex load_dataset(const std::filesystem::path& root);

// Writes the layout read by load_dataset, frames numbered from 0.
void write_dataset(const DatasetIndex& index, const std::filesystem::path& root);

std::vector<std::string> read_mapping(const std::filesystem::path& path);
void write_mapping(const std::filesystem::path& path, const std::vector<std::string>& class_names);

// One class name per line.
LabelSequence read_label_file(const std::filesystem::path& path, const std::vector<std::string>& class_names);
void write_label_file(const std::filesystem::path& path, const LabelSequence& labels,
                      const std::vector<std::string>& class_names);

// Every sample_rate-th frame of a source as floats [T', H, W, 3].
Tensor<float> load_frames(const FrameSource& source, std::size_t sample_rate);

} // namespace svtas

#include "svtas/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "svtas/parameters.hpp"
#include "svtas/png_io.hpp"

namespace svtas {

namespace fs = std::filesystem;

void SyntheticSpec::validate() const {
    if (num_videos < 1) throw ConfigError("synthetic: num_videos must be >= 1");
    if (frames_per_video < 1) throw ConfigError("synthetic: frames_per_video must be >= 1");
    if (height < 8 || width < 8) throw ConfigError("synthetic: frames must be at least 8x8");
    if (num_classes < 2) throw ConfigError("synthetic: need background plus at least one action class");
    if (min_segment < 1 || min_segment > max_segment || max_segment > frames_per_video)
        throw ConfigError("synthetic: need 1 <= min_segment <= max_segment <= frames_per_video");
    const std::size_t fewest = (frames_per_video + max_segment - 1) / max_segment;
    const std::size_t most = frames_per_video / min_segment;
    if (fewest > most)
        throw ConfigError("synthetic: " + std::to_string(frames_per_video) + " frames cannot be split into segments of " +
                          std::to_string(min_segment) + ".." + std::to_string(max_segment) + " frames");
}

SyntheticSpec SyntheticSpec::preset(const std::string& name) {
    SyntheticSpec s;
    if (name == "default") return s;
    if (name == "tiny") {
        s.num_videos = 4;
        s.frames_per_video = 64;
        s.min_segment = 8;
        s.max_segment = 24;
        return s;
    }
    throw ConfigError("unknown synthetic preset '" + name + "' (expected default or tiny)");
}

MemoryFrameSource::MemoryFrameSource(std::size_t frames, std::size_t height, std::size_t width,
                                     std::vector<std::uint8_t> pixels)
    : frames_(frames), height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != frames_ * height_ * width_ * 3) throw DataError("frame buffer size mismatch");
}

std::span<const std::uint8_t> MemoryFrameSource::frame_bytes(std::size_t i) const {
    const std::size_t n = height_ * width_ * 3;
    return std::span<const std::uint8_t>(pixels_).subspan(i * n, n);
}

void MemoryFrameSource::read_frame(std::size_t i, std::span<float> out) const {
    if (i >= frames_) throw DataError("frame index " + std::to_string(i) + " out of range");
    const auto bytes = frame_bytes(i);
    if (out.size() != bytes.size()) throw ShapeError("read_frame: output buffer has the wrong size");
    for (std::size_t j = 0; j < bytes.size(); ++j) out[j] = float(bytes[j]) / 255.0f;
}

PngDirectorySource::PngDirectorySource(fs::path dir, std::size_t frames, std::size_t first_index)
    : dir_(std::move(dir)), frames_(frames), first_index_(first_index) {
    if (frames_ > 0) {
        const RgbImage first = read_png(frame_path(0));
        height_ = first.height;
        width_ = first.width;
    }
}

fs::path PngDirectorySource::frame_path(std::size_t i) const {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.png", i + first_index_);
    return dir_ / name;
}

void PngDirectorySource::read_frame(std::size_t i, std::span<float> out) const {
    if (i >= frames_) throw DataError("frame index " + std::to_string(i) + " out of range");
    const RgbImage img = read_png(frame_path(i));
    if (img.height != height_ || img.width != width_)
        throw DataError(frame_path(i).string() + ": size " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                        " differs from the first frame");
    if (out.size() != img.pixels.size()) throw ShapeError("read_frame: output buffer has the wrong size");
    for (std::size_t j = 0; j < img.pixels.size(); ++j) out[j] = float(img.pixels[j]) / 255.0f;
}

void NoiseFrameSource::read_frame(std::size_t i, std::span<float> out) const {
    if (i >= frames_) throw DataError("frame index " + std::to_string(i) + " out of range");
    if (out.size() != height_ * width_ * 3) throw ShapeError("read_frame: output buffer has the wrong size");
    std::seed_seq seq{std::uint64_t(seed_), std::uint64_t(i)};
    Rng rng(seq);
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    for (auto& v : out) v = unit(rng);
}

namespace {

struct Rgb {
    double r, g, b;
};

constexpr std::array<Rgb, 8> kPalette = {{{0.90, 0.20, 0.20},
                                          {0.20, 0.75, 0.25},
                                          {0.20, 0.35, 0.95},
                                          {0.95, 0.85, 0.15},
                                          {0.85, 0.25, 0.85},
                                          {0.15, 0.85, 0.85},
                                          {0.95, 0.55, 0.10},
                                          {0.55, 0.35, 0.15}}};

enum class ShapeKind { Disc, Square, Triangle, Cross };
enum class Motion { Horizontal, Vertical, Orbit, Pulse };

// Distinct (shape, colour, motion) per action class.
struct Signature {
    ShapeKind shape;
    Rgb colour;
    Motion motion;
};

Signature class_signature(std::size_t c) {
    const std::size_t a = c - 1;
    return {ShapeKind(a % 4), kPalette[a % kPalette.size()], Motion((a + a / 4) % 4)};
}

bool inside(ShapeKind shape, double dx, double dy, double r) {
    switch (shape) {
    case ShapeKind::Disc: return dx * dx + dy * dy <= r * r;
    case ShapeKind::Square: return std::abs(dx) <= r * 0.85 && std::abs(dy) <= r * 0.85;
    case ShapeKind::Triangle: return dy <= r * 0.8 && dy >= -r && std::abs(dx) <= (dy + r) * 0.6;
    case ShapeKind::Cross: return (std::abs(dx) <= r * 0.3 && std::abs(dy) <= r) || (std::abs(dy) <= r * 0.3 && std::abs(dx) <= r);
    }
    return false;
}

// Segment lengths in [lo, hi] summing to total.
std::vector<std::size_t> draw_segment_lengths(std::size_t total, std::size_t lo, std::size_t hi, Rng& rng) {
    const std::size_t fewest = (total + hi - 1) / hi, most = total / lo;
    // Prefer the middle of the feasible range so segments are neither all minimal nor all maximal.
    const std::size_t mid = std::clamp<std::size_t>(total * 2 / (lo + hi), fewest, most);
    std::uniform_int_distribution<std::size_t> pick(std::max(fewest, mid > 1 ? mid - 1 : mid), std::min(most, mid + 1));
    const std::size_t n = pick(rng);
    std::vector<std::size_t> lens(n, lo);
    std::size_t extra = total - n * lo;
    std::uniform_int_distribution<std::size_t> which(0, n - 1);
    while (extra > 0) {
        const std::size_t i = which(rng);
        if (lens[i] < hi) {
            ++lens[i];
            --extra;
        }
    }
    return lens;
}

void render_frame(const SyntheticSpec& spec, const Rgb& backdrop, std::size_t cls, double phase, double jitter_x,
                  double jitter_y, std::normal_distribution<double>& noise, Rng& rng, std::uint8_t* out) {
    const double h = double(spec.height), w = double(spec.width);
    double cx = w / 2 + jitter_x, cy = h / 2 + jitter_y;
    double r = 0.26 * std::min(h, w);
    Signature sig{};
    if (cls != kBackgroundClass) {
        sig = class_signature(cls);
        const double angle = 2 * std::numbers::pi * phase / 24.0;
        switch (sig.motion) {
        case Motion::Horizontal: cx += 0.25 * w * std::sin(angle); break;
        case Motion::Vertical: cy += 0.25 * h * std::sin(angle); break;
        case Motion::Orbit:
            cx += 0.2 * w * std::cos(angle);
            cy += 0.2 * h * std::sin(angle);
            break;
        case Motion::Pulse: r *= 1.0 + 0.3 * std::sin(angle); break;
        }
    }
    for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
            Rgb px = backdrop;
            // Faint static gradient so the backdrop is not flat.
            const double shade = 0.08 * (double(y) / h - 0.5);
            px.r += shade;
            px.g += shade;
            px.b += shade;
            if (cls != kBackgroundClass && inside(sig.shape, double(x) + 0.5 - cx, double(y) + 0.5 - cy, r)) px = sig.colour;
            const double c[3] = {px.r, px.g, px.b};
            for (int k = 0; k < 3; ++k) {
                const double v = std::clamp(c[k] + noise(rng), 0.0, 1.0);
                out[(y * spec.width + x) * 3 + k] = std::uint8_t(std::lround(v * 255.0));
            }
        }
    }
}

std::string rstrip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    return s;
}

} // namespace

DatasetIndex generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    DatasetIndex index;
    index.class_names.push_back("background");
    for (std::size_t c = 1; c < spec.num_classes; ++c) index.class_names.push_back("action" + std::to_string(c));

    const std::size_t frame_size = spec.height * spec.width * 3;
    for (std::size_t v = 0; v < spec.num_videos; ++v) {
        std::seed_seq seq{std::uint64_t(spec.seed), std::uint64_t(v), std::uint64_t(0x5EED)};
        Rng rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> noise(0.0, 0.03);

        const Rgb backdrop{0.35 + 0.1 * unit(rng), 0.35 + 0.1 * unit(rng), 0.35 + 0.1 * unit(rng)};
        const auto lens = draw_segment_lengths(spec.frames_per_video, spec.min_segment, spec.max_segment, rng);

        std::vector<ClassId> labels;
        labels.reserve(spec.frames_per_video);
        std::vector<std::uint8_t> pixels(spec.frames_per_video * frame_size);
        std::uniform_int_distribution<std::size_t> other(1, spec.num_classes - 1);
        std::size_t cls = std::size_t(-1), t = 0;
        for (const std::size_t len : lens) {
            std::size_t next = unit(rng) < 0.25 ? kBackgroundClass : other(rng);
            if (next == cls) next = (next + 1) % spec.num_classes;
            cls = next;
            const double phase0 = 24.0 * unit(rng);
            const double jx = (unit(rng) - 0.5) * 0.1 * double(spec.width);
            const double jy = (unit(rng) - 0.5) * 0.1 * double(spec.height);
            for (std::size_t p = 0; p < len; ++p, ++t) {
                labels.push_back(ClassId(cls));
                render_frame(spec, backdrop, cls, phase0 + double(p), jx, jy, noise, rng, pixels.data() + t * frame_size);
            }
        }
        char id[32];
        std::snprintf(id, sizeof id, "video_%03zu", v);
        index.videos.push_back({id,
                                std::make_shared<MemoryFrameSource>(spec.frames_per_video, spec.height, spec.width,
                                                                    std::move(pixels)),
                                LabelSequence(std::move(labels), spec.num_classes)});
    }
    return index;
}

std::vector<std::string> read_mapping(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::map<long, std::string> by_id;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        line = rstrip(line);
        if (line.empty()) continue;
        std::istringstream ss(line);
        long id = -1;
        std::string name;
        if (!(ss >> id) || !std::getline(ss >> std::ws, name) || name.empty() || id < 0)
            throw DataError(path.string() + " line " + std::to_string(lineno) + ": expected '<id> <class_name>'");
        if (!by_id.emplace(id, name).second)
            throw DataError(path.string() + " line " + std::to_string(lineno) + ": duplicate id " + std::to_string(id));
    }
    std::vector<std::string> names;
    for (const auto& [id, name] : by_id) {
        if (id != long(names.size())) throw DataError(path.string() + ": class ids must be 0..n-1 without gaps");
        if (std::find(names.begin(), names.end(), name) != names.end())
            throw DataError(path.string() + ": duplicate class name '" + name + "'");
        names.push_back(name);
    }
    if (names.empty()) throw DataError(path.string() + ": no classes");
    return names;
}

void write_mapping(const fs::path& path, const std::vector<std::string>& class_names) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t i = 0; i < class_names.size(); ++i) out << i << ' ' << class_names[i] << '\n';
}

LabelSequence read_label_file(const fs::path& path, const std::vector<std::string>& class_names) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::map<std::string, ClassId> lookup;
    for (std::size_t i = 0; i < class_names.size(); ++i) lookup[class_names[i]] = ClassId(i);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(rstrip(line));
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::vector<ClassId> labels;
    labels.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto it = lookup.find(lines[i]);
        if (it == lookup.end())
            throw DataError(path.string() + " line " + std::to_string(i + 1) + ": unknown class '" + lines[i] + "'");
        labels.push_back(it->second);
    }
    return LabelSequence(std::move(labels), class_names.size());
}

void write_label_file(const fs::path& path, const LabelSequence& labels, const std::vector<std::string>& class_names) {
    if (labels.num_classes() > class_names.size()) throw DataError("write_label_file: class names do not cover the labels");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const ClassId c : labels) out << class_names[std::size_t(c)] << '\n';
}

DatasetIndex load_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw DataError("dataset directory " + root.string() + " does not exist");
    DatasetIndex index;
    index.class_names = read_mapping(root / "mapping.txt");
    const fs::path gt_dir = root / "groundTruth";
    if (!fs::is_directory(gt_dir)) throw DataError(gt_dir.string() + " is missing");
    std::vector<fs::path> label_files;
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.is_regular_file() && e.path().extension() == ".txt") label_files.push_back(e.path());
    std::sort(label_files.begin(), label_files.end());
    for (const auto& file : label_files) {
        Video v;
        v.id = file.stem().string();
        v.labels = read_label_file(file, index.class_names);
        const fs::path frame_dir = root / "frames" / v.id;
        if (!fs::is_directory(frame_dir)) throw DataError(frame_dir.string() + " is missing");
        std::size_t count = 0;
        for (const auto& e : fs::directory_iterator(frame_dir)) {
            const std::string name = e.path().filename().string();
            if (name.rfind("frame_", 0) == 0 && e.path().extension() == ".png") ++count;
        }
        const std::size_t first = fs::exists(frame_dir / "frame_000000.png") ? 0 : 1;
        if (count != v.labels.size())
            throw DataError(v.id + ": " + std::to_string(count) + " frames but " + std::to_string(v.labels.size()) +
                            " labels");
        auto source = std::make_shared<PngDirectorySource>(frame_dir, count, first);
        for (std::size_t i = 0; i < count; ++i) {
            if (!fs::exists(source->frame_path(i)))
                throw DataError(v.id + ": missing " + source->frame_path(i).filename().string());
        }
        v.frames = std::move(source);
        index.videos.push_back(std::move(v));
    }
    if (index.videos.empty()) throw DataError(gt_dir.string() + " has no label files");
    return index;
}

void write_dataset(const DatasetIndex& index, const fs::path& root) {
    fs::create_directories(root / "groundTruth");
    write_mapping(root / "mapping.txt", index.class_names);
    for (const auto& v : index.videos) {
        write_label_file(root / "groundTruth" / (v.id + ".txt"), v.labels, index.class_names);
        const fs::path dir = root / "frames" / v.id;
        fs::create_directories(dir);
        RgbImage img;
        img.height = v.frames->height();
        img.width = v.frames->width();
        std::vector<float> buf(img.height * img.width * 3);
        img.pixels.resize(buf.size());
        for (std::size_t i = 0; i < v.frames->frame_count(); ++i) {
            v.frames->read_frame(i, buf);
            for (std::size_t j = 0; j < buf.size(); ++j) img.pixels[j] = std::uint8_t(std::lround(buf[j] * 255.0f));
            char name[32];
            std::snprintf(name, sizeof name, "frame_%06zu.png", i);
            write_png(dir / name, img);
        }
    }
}

Tensor<float> load_frames(const FrameSource& source, std::size_t sample_rate) {
    const std::size_t n = subsampled_length(source.frame_count(), sample_rate);
    const std::size_t fs = source.height() * source.width() * 3;
    Tensor<float> out({n, source.height(), source.width(), 3});
    for (std::size_t i = 0; i < n; ++i) source.read_frame(i * sample_rate, out.values().subspan(i * fs, fs));
    return out;
}

} // namespace svtas

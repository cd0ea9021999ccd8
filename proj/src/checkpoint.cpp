#include "svtas/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace svtas {

namespace {

constexpr char kMagic[8] = {'S', 'V', 'T', 'A', 'S', 'C', 'K', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

nlohmann::json model_meta(const Model<float>& model) {
    nlohmann::json cfg = model.config();
    nlohmann::json j;
    j["config"] = cfg;
    j["config_hash"] = config_hash(cfg);
    j["variant"] = variant_name(model.variant());
    j["class_names"] = model.class_names();
    j["vocab"] = model.vocabulary().to_json();
    return j;
}

struct RawCheckpoint {
    nlohmann::json manifest;
    std::vector<char> data;
};

RawCheckpoint read_raw(const std::filesystem::path& path, bool with_data) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[8];
    std::uint64_t len = 0;
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError(path.string() + ": not a checkpoint (bad magic)");
    if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > (1u << 30))
        throw DataError(path.string() + ": bad manifest length");
    std::string text(len, '\0');
    if (!in.read(text.data(), std::streamsize(len))) throw DataError(path.string() + ": truncated manifest");
    RawCheckpoint raw;
    try {
        raw.manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": manifest is not valid JSON: " + e.what());
    }
    if (with_data) raw.data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return raw;
}

CheckpointManifest parse_manifest(const nlohmann::json& j) {
    CheckpointManifest m;
    try {
        m.config = j.at("config").get<ModelConfig>();
        m.variant = parse_variant(j.at("variant").get<std::string>());
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.run = j.value("run", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint manifest: ") + e.what());
    }
    m.raw = j;
    return m;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model, const nlohmann::json& run) {
    nlohmann::json manifest = model_meta(model);
    manifest["run"] = run;
    nlohmann::json tensors = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, var] : model.parameters().entries()) {
        const std::uint64_t nbytes = var.value().numel() * sizeof(float);
        tensors.push_back({{"name", name}, {"shape", var.value().shape()}, {"offset", offset}, {"nbytes", nbytes}});
        offset += nbytes;
    }
    manifest["tensors"] = tensors;
    const std::string text = manifest.dump();
    const std::uint64_t len = text.size();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), std::streamsize(len));
    for (const auto& e : model.parameters().entries()) {
        const auto& t = e.second.value();
        out.write(reinterpret_cast<const char*>(t.data()), std::streamsize(t.numel() * sizeof(float)));
    }
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

CheckpointManifest read_checkpoint_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_raw(path, false).manifest);
}

Model<float> load_checkpoint(const std::filesystem::path& path) {
    const RawCheckpoint raw = read_raw(path, true);
    const CheckpointManifest m = parse_manifest(raw.manifest);
    m.config.validate();
    Model<float> model(m.variant, m.config, m.class_names, 0);
    if (raw.manifest.contains("vocab") && raw.manifest["vocab"] != model.vocabulary().to_json())
        throw DataError(path.string() + ": vocabulary does not match the class names");

    auto& entries = model.parameters().entries();
    const auto& tensors = raw.manifest.at("tensors");
    if (tensors.size() != entries.size())
        throw DataError(path.string() + ": expected " + std::to_string(entries.size()) + " tensors, found " +
                        std::to_string(tensors.size()));
    for (const auto& t : tensors) {
        const std::string name = t.at("name").get<std::string>();
        const Shape shape = t.at("shape").get<Shape>();
        const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
        const std::uint64_t nbytes = t.at("nbytes").get<std::uint64_t>();
        ag::Var<float> var = model.parameters().get(name);
        if (shape != var.value().shape())
            throw DataError(path.string() + ": tensor " + name + " has shape " + shape_str(shape) + ", model expects " +
                            shape_str(var.value().shape()));
        if (nbytes != var.value().numel() * sizeof(float) || offset + nbytes > raw.data.size())
            throw DataError(path.string() + ": tensor " + name + " is truncated");
        std::memcpy(var.mutable_value().data(), raw.data.data() + offset, nbytes);
    }
    return model;
}

} // namespace svtas

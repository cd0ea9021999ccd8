// svtas: train, evaluate, stream and benchmark streaming segmentation models.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "svtas/checkpoint.hpp"
#include "svtas/datasets.hpp"
#include "svtas/errors.hpp"
#include "svtas/run_config.hpp"
#include "svtas/streaming.hpp"
#include "svtas/trainer.hpp"

namespace fs = std::filesystem;
using namespace svtas;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kData = 3 };

struct Flags {
    std::string config;
    std::string variant;
    std::optional<std::size_t> k, sample_rate, epochs;
    std::optional<std::uint64_t> seed;
    std::string out, synthetic, dataset, checkpoint, predictions, video;
    std::vector<std::size_t> lengths{100, 10000};
    std::vector<std::size_t> ks{8, 16, 32};
    std::size_t samples = 100;
    double stop_accuracy = 2.0;
    bool teacher_forced = false;
};

RunConfig resolve(const Flags& f) {
    RunConfig rc = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (!f.variant.empty()) rc.variant = parse_variant(f.variant);
    if (f.k) rc.model.k = *f.k;
    if (f.sample_rate) rc.model.sample_rate = *f.sample_rate;
    if (f.seed) rc.seed = *f.seed;
    if (f.epochs) rc.epochs = *f.epochs;
    if (!f.out.empty()) rc.out = f.out;
    if (!f.synthetic.empty()) {
        rc.synthetic = f.synthetic;
        rc.dataset.reset();
    }
    if (!f.dataset.empty()) {
        rc.dataset = f.dataset;
        rc.synthetic.reset();
    }
    rc.model.validate();
    return rc;
}

DatasetIndex load_data(const RunConfig& rc) {
    if (rc.dataset) return load_dataset(*rc.dataset);
    SyntheticSpec spec = SyntheticSpec::preset(rc.synthetic.value_or("default"));
    spec.seed = rc.seed;
    return generate_synthetic(spec);
}

// Class count and frame size follow the data.
void adopt_dataset_shape(ModelConfig& cfg, const DatasetIndex& data) {
    cfg.num_classes = data.class_names.size();
    if (!data.videos.empty()) {
        cfg.height = data.videos.front().frames->height();
        cfg.width = data.videos.front().frames->width();
    }
    cfg.validate();
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json eval_json(const EvalResult& r, const std::string& hash) {
    json j = r.to_json();
    j["config_hash"] = hash;
    return j;
}

int cmd_train(const Flags& f) {
    RunConfig rc = resolve(f);
    const DatasetIndex data = load_data(rc);
    adopt_dataset_shape(rc.model, data);
    const std::string hash = rc.hash();
    const auto videos = prepare_videos(data, rc.model);

    Model<float> model(rc.variant, rc.model, data.class_names, rc.seed);
    fs::create_directories(rc.out);
    std::ofstream log(fs::path(rc.out) / "train_log.jsonl");
    TrainOptions opts;
    opts.epochs = rc.epochs;
    opts.seed = rc.seed;
    opts.stop_accuracy = f.stop_accuracy;
    opts.stop_autoregressive_accuracy = f.stop_accuracy;
    opts.log = &log;
    opts.config_hash = hash;
    const TrainResult result = train_model(model, videos, opts);

    const fs::path ckpt = fs::path(rc.out) / "checkpoint.svtas";
    save_checkpoint(ckpt, model, json{{"run", rc}, {"config_hash", hash}});
    json summary = {{"config_hash", hash},
                    {"variant", variant_name(rc.variant)},
                    {"epochs_run", result.epochs.size()},
                    {"final_loss", result.final_loss()},
                    {"final_acc", result.epochs.back().accuracy},
                    {"checkpoint", ckpt.string()},
                    {"run", rc}};
    if (result.epochs.back().autoregressive_accuracy)
        summary["final_autoregressive_acc"] = *result.epochs.back().autoregressive_accuracy;
    write_json(fs::path(rc.out) / "train_summary.json", summary);
    std::cout << summary.dump() << '\n';
    return kOk;
}

// Loads the checkpoint and the data it should be evaluated on. The synthetic
// seed defaults to the one the checkpoint was trained with.
std::pair<Model<float>, RunConfig> load_model_and_run(const Flags& f) {
    if (f.checkpoint.empty()) throw ConfigError("--checkpoint is required");
    const CheckpointManifest m = read_checkpoint_manifest(f.checkpoint);
    RunConfig rc;
    if (m.run.contains("run")) rc = m.run.at("run").get<RunConfig>();
    rc.model = m.config;
    rc.variant = m.variant;
    if (!f.out.empty()) rc.out = f.out;
    if (f.seed) rc.seed = *f.seed;
    if (!f.synthetic.empty()) {
        rc.synthetic = f.synthetic;
        rc.dataset.reset();
    }
    if (!f.dataset.empty()) {
        rc.dataset = f.dataset;
        rc.synthetic.reset();
    }
    if (!f.variant.empty() && parse_variant(f.variant) != m.variant)
        throw ConfigError("checkpoint holds a " + variant_name(m.variant) + " model, not " + f.variant);
    if ((f.k && *f.k != m.config.k) || (f.sample_rate && *f.sample_rate != m.config.sample_rate))
        throw ConfigError("--k/--sample-rate differ from the checkpoint config");
    return {load_checkpoint(f.checkpoint), rc};
}

int eval_predictions(const Flags& f) {
    RunConfig rc = resolve(f);
    const DatasetIndex data = load_data(rc);
    std::vector<VideoEvaluation> evals;
    for (const auto& v : data.videos) {
        VideoEvaluation e;
        e.video = v.id;
        e.ground_truth = v.labels;
        e.prediction = read_label_file(fs::path(f.predictions) / (v.id + ".txt"), data.class_names);
        if (e.prediction.size() != e.ground_truth.size())
            throw DataError(v.id + ": " + std::to_string(e.prediction.size()) + " predicted frames, " +
                            std::to_string(e.ground_truth.size()) + " ground-truth frames");
        e.proposals = run_length_encode(e.prediction);
        evals.push_back(std::move(e));
    }
    const json report = eval_json(evaluate(evals), rc.hash());
    write_json(fs::path(rc.out) / "metrics.json", report);
    std::cout << report.dump() << '\n';
    return kOk;
}

int cmd_eval(const Flags& f) {
    if (!f.predictions.empty()) return eval_predictions(f);
    auto [model, rc] = load_model_and_run(f);
    const DatasetIndex data = load_data(rc);
    const std::string hash = rc.hash();
    const auto videos = prepare_videos(data, model.config());
    const DecodeMode mode = f.teacher_forced ? DecodeMode::TeacherForced : DecodeMode::Autoregressive;
    const ModelEvaluation result = evaluate_model(model, videos, mode);

    const fs::path pred_dir = fs::path(rc.out) / "predictions";
    fs::create_directories(pred_dir);
    for (const auto& p : result.predictions) write_label_file(pred_dir / (p.id + ".txt"), p.full_labels, data.class_names);
    json report = eval_json(result.metrics, hash);
    report["variant"] = variant_name(model.variant());
    report["decode"] = f.teacher_forced ? "teacher_forced" : "autoregressive";
    write_json(fs::path(rc.out) / "metrics.json", report);
    std::cout << report.dump() << '\n';
    return kOk;
}

int cmd_stream(const Flags& f) {
    auto [model, rc] = load_model_and_run(f);
    const DatasetIndex data = load_data(rc);
    const std::string hash = rc.hash();
    const Video* video = &data.videos.front();
    if (!f.video.empty()) {
        video = nullptr;
        for (const auto& v : data.videos)
            if (v.id == f.video) video = &v;
        if (!video) throw DataError("no video named " + f.video);
    }
    const auto& cfg = model.config();
    ChunkReader reader(*video->frames, cfg.k, cfg.sample_rate);
    StreamSession<float> session(model);
    Chunk<float> chunk;
    while (reader.next(chunk)) {
        const StepCost cost = session.measure_step_cost(chunk);
        const auto pred = session.prev_pred_labels()->slice(0, chunk.valid_count);
        std::vector<std::string> names;
        for (const ClassId c : pred) names.push_back(data.class_names[std::size_t(c)]);
        std::cout << json{{"video", video->id},
                          {"chunk", chunk.index},
                          {"frames", chunk.valid_count},
                          {"labels", names},
                          {"latency_ms", cost.wall_time_seconds * 1e3},
                          {"cache_bytes", cost.cache.total()},
                          {"config_hash", hash}}
                         .dump()
                  << '\n';
    }
    return kOk;
}

json footprint_json(const CacheFootprint& c) {
    return {{"tcn", c.tcn_bytes}, {"shift", c.shift_bytes}, {"text", c.text_bytes}, {"labels", c.label_bytes},
            {"total", c.total()}};
}

int cmd_bench(const Flags& f) {
    std::optional<Model<float>> model;
    RunConfig rc;
    if (!f.checkpoint.empty()) {
        auto loaded = load_model_and_run(f);
        model.emplace(std::move(loaded.first));
        rc = loaded.second;
    } else {
        rc = resolve(f);
        std::vector<std::string> names{"background"};
        for (std::size_t c = 1; c < rc.model.num_classes; ++c) names.push_back("action" + std::to_string(c));
        model.emplace(rc.variant, rc.model, names, rc.seed);
    }
    const std::string hash = rc.hash();
    const auto& cfg = model->config();
    json rows = json::array();
    std::optional<CacheFootprint> reference;
    bool constant = true;
    for (const std::size_t len : f.lengths) {
        NoiseFrameSource source(len, cfg.height, cfg.width, rc.seed);
        const std::size_t chunks = ChunkReader(source, cfg.k, cfg.sample_rate).chunk_count();
        const LatencyReport r = measure_stream_latency(*model, source, std::max(f.samples, chunks));
        if (!reference) reference = r.first_cache;
        constant = constant && r.constant_cache && r.first_cache == *reference && r.last_cache == *reference;
        rows.push_back({{"frames", len},
                        {"chunks", r.chunks},
                        {"samples", r.samples},
                        {"median_ms", r.median_ms},
                        {"p95_ms", r.p95_ms},
                        {"mean_ms", r.mean_ms},
                        {"cache_first", footprint_json(r.first_cache)},
                        {"cache_last", footprint_json(r.last_cache)}});
    }
    const json report = {{"variant", variant_name(model->variant())},
                         {"k", cfg.k},
                         {"sample_rate", cfg.sample_rate},
                         {"lengths", rows},
                         {"expected_cache", footprint_json(expected_footprint(cfg, model->variant()))},
                         {"cache_constant", constant},
                         {"config_hash", hash}};
    write_json(fs::path(rc.out) / "bench.json", report);
    std::cout << report.dump(2) << '\n';
    if (!constant) {
        std::cerr << "cache bytes changed with stream length\n";
        return kOther;
    }
    return kOk;
}

int cmd_sweep(const Flags& f) {
    RunConfig base = resolve(f);
    const DatasetIndex data = load_data(base);
    adopt_dataset_shape(base.model, data);
    json rows = json::array();
    std::ostringstream table;
    table << "| k | Acc | F1@0.1 | F1@0.25 | F1@0.5 | mAP@0.5 | AUC | epochs | train s |\n"
          << "|---|-----|--------|---------|--------|---------|-----|--------|---------|\n";
    for (const std::size_t k : f.ks) {
        RunConfig rc = base;
        rc.model.k = k;
        rc.model.validate();
        const std::string hash = rc.hash();
        const auto videos = prepare_videos(data, rc.model);
        Model<float> model(rc.variant, rc.model, data.class_names, rc.seed);
        const fs::path dir = fs::path(rc.out) / ("k" + std::to_string(k));
        fs::create_directories(dir);
        std::ofstream log(dir / "train_log.jsonl");
        TrainOptions opts;
        opts.epochs = rc.epochs;
        opts.seed = rc.seed;
        opts.stop_accuracy = f.stop_accuracy;
        opts.stop_autoregressive_accuracy = f.stop_accuracy;
        opts.log = &log;
        opts.config_hash = hash;
        const TrainResult tr = train_model(model, videos, opts);
        double seconds = 0;
        for (const auto& e : tr.epochs) seconds += e.seconds;
        const EvalResult m = evaluate_model(model, videos, DecodeMode::Autoregressive).metrics;
        write_json(dir / "metrics.json", eval_json(m, hash));
        rows.push_back({{"k", k}, {"metrics", eval_json(m, hash)}, {"epochs_run", tr.epochs.size()}, {"train_seconds", seconds},
                        {"config_hash", hash}});
        char line[256];
        std::snprintf(line, sizeof line, "| %zu | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %zu | %.1f |\n", k, m.acc,
                      m.f1.at("0.1"), m.f1.at("0.25"), m.f1.at("0.5"), m.map50, m.auc, tr.epochs.size(), seconds);
        table << line;
        std::cerr << line << std::flush;
    }
    const json report = {{"variant", variant_name(base.variant)}, {"rows", rows}, {"config_hash", base.hash()}};
    write_json(fs::path(base.out) / "sweep.json", report);
    std::ofstream(fs::path(base.out) / "sweep.md") << "<!-- config_hash " << base.hash() << " -->\n" << table.str();
    std::cout << table.str();
    return kOk;
}

int cmd_generate(const Flags& f) {
    RunConfig rc = resolve(f);
    if (rc.dataset) throw ConfigError("generate writes a synthetic dataset; use --synthetic");
    const DatasetIndex data = load_data(rc);
    write_dataset(data, rc.out);
    write_json(fs::path(rc.out) / "generator.json", {{"preset", rc.synthetic.value_or("default")},
                                                     {"seed", rc.seed},
                                                     {"videos", data.videos.size()},
                                                     {"config_hash", rc.hash()}});
    std::cout << "wrote " << data.videos.size() << " videos to " << rc.out << '\n';
    return kOk;
}

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "run config JSON; flags override it");
    app->add_option("--variant", f.variant, "sete, mete or transeger");
    app->add_option("--k", f.k, "chunk size in frames");
    app->add_option("--sample-rate", f.sample_rate, "keep every n-th frame");
    app->add_option("--seed", f.seed, "global seed");
    app->add_option("--out", f.out, "output directory");
}

void add_data(CLI::App* app, Flags& f) {
    auto* syn = app->add_option("--synthetic", f.synthetic, "synthetic preset: default or tiny");
    auto* ds = app->add_option("--dataset", f.dataset, "dataset root directory");
    syn->excludes(ds);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming video temporal action segmentation"};
    app.require_subcommand(1);
    Flags f;

    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train, f);
    add_data(train, f);
    train->add_option("--epochs", f.epochs, "maximum epochs");
    train->add_option("--stop-accuracy", f.stop_accuracy, "stop once training accuracy reaches this");

    auto* eval = app.add_subcommand("eval", "stream a dataset through a checkpoint and report metrics");
    add_common(eval, f);
    add_data(eval, f);
    eval->add_option("--checkpoint", f.checkpoint, "checkpoint file");
    eval->add_option("--predictions", f.predictions, "score per-frame label files in this directory instead");
    eval->add_flag("--teacher-forced", f.teacher_forced, "prompt Transeger with ground truth");

    auto* stream = app.add_subcommand("stream", "stream one video and print per-chunk predictions");
    add_common(stream, f);
    add_data(stream, f);
    stream->add_option("--checkpoint", f.checkpoint, "checkpoint file")->required();
    stream->add_option("--video", f.video, "video id (default: first)");

    auto* bench = app.add_subcommand("bench", "per-chunk latency and cache bytes over stream lengths");
    add_common(bench, f);
    bench->add_option("--checkpoint", f.checkpoint, "checkpoint file (default: random weights)");
    bench->add_option("--lengths", f.lengths, "stream lengths in frames");
    bench->add_option("--samples", f.samples, "minimum timed chunks per length");

    auto* sweep = app.add_subcommand("sweep", "train and evaluate over chunk sizes");
    add_common(sweep, f);
    add_data(sweep, f);
    sweep->add_option("--ks", f.ks, "chunk sizes");
    sweep->add_option("--epochs", f.epochs, "maximum epochs per run");
    sweep->add_option("--stop-accuracy", f.stop_accuracy, "stop once training accuracy reaches this");

    auto* gen = app.add_subcommand("generate", "write a synthetic dataset to disk");
    add_common(gen, f);
    add_data(gen, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*train) return cmd_train(f);
        if (*eval) return cmd_eval(f);
        if (*stream) return cmd_stream(f);
        if (*bench) return cmd_bench(f);
        if (*sweep) return cmd_sweep(f);
        if (*gen) return cmd_generate(f);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const VocabularyError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}

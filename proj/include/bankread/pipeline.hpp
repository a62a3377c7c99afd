// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_PIPELINE_HPP
#define BANKREAD_PIPELINE_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "bankread/dataset.hpp"
#include "bankread/dataset_io.hpp"
#include "bankread/glyph.hpp"
#include "bankread/model_io.hpp"
#include "bankread/pgm.hpp"
#include "bankread/readout.hpp"
#include "bankread/train.hpp"

namespace bankread {

// Where the keyframe comes from: a procedural render, or any user PGM
// (which then has to pass the aliasing gate like everything else). When
// resize_width/height are set the resolved glyph is bilinearly resized,
// which is how the scale sweep shrinks pixel counts.
struct GlyphSource {
    int width = 64;
    int height = 64;
    std::string pgm_path;  // empty -> procedural
    int resize_width = 0;  // 0 -> natural size
    int resize_height = 0;
};

struct Seeds {
    std::uint64_t data = 1;    // replication noise sub-seeds
    std::uint64_t init = 2;    // weight initialization
    std::uint64_t shuffle = 3; // sample order
};

// Full description of one train/evaluate run. Every emitted report echoes
// this back so any result can be reproduced from its own file.
struct PipelineConfig {
    GlyphSource glyph;
    double max_angle_deg = 90.0;
    double step_deg = 3.0;
    int num_train_copies = 20;
    int num_test_copies = 10;
    std::optional<NoiseSpec> train_noise;
    std::optional<NoiseSpec> test_noise;
    double alias_min_distance = 0.01;
    ModelConfig model;
    Seeds seeds;
    std::string output_dir = "out";
    bool save_artifacts = true; // write model/report files into output_dir
};

// Wall-clock seconds around each pipeline stage.
struct RunTimings {
    double canon_gen_s = 0.0;
    double gen_train_test_s = 0.0;
    double run_train_test_s = 0.0;
    double model_save_s = 0.0;
    double test_infer_s = 0.0;
    double single_image_infer_s = 0.0;
};

struct PipelineReport {
    PipelineConfig config;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    TrainHistory history;
    RunTimings timings;
    double total_wall_s = 0.0;
    double inference_fps = 0.0; // test set size / test_infer_s
    std::string model_path;
    Readout sample_readout; // single-image exhibit, canon angle closest to -12
    double sample_actual_angle = 0.0;
};

namespace detail {

inline double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

// Resolves the glyph of a config: procedural or loaded from PGM, then
// optionally resized.
inline GrayImage pipeline_glyph(const PipelineConfig& cfg) {
    GrayImage glyph = cfg.glyph.pgm_path.empty()
                          ? make_default_glyph(cfg.glyph.width, cfg.glyph.height)
                          : load_pgm(cfg.glyph.pgm_path);
    if (cfg.glyph.resize_width > 0 && cfg.glyph.resize_height > 0 &&
        (cfg.glyph.resize_width != glyph.width || cfg.glyph.resize_height != glyph.height))
        glyph = resize(glyph, cfg.glyph.resize_width, cfg.glyph.resize_height);
    return glyph;
}

// glyph -> canon -> replicate train/test -> train -> evaluate -> save ->
// single-image benchmark. Any stage failure propagates with the stage
// named in the message.
inline PipelineReport run_pipeline(const PipelineConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    PipelineReport report;
    report.config = cfg;

    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(std::string("pipeline stage '") + name + "' failed: " + e.what());
        }
    };

    // canon generation
    auto t0 = std::chrono::steady_clock::now();
    const GrayImage glyph = stage("glyph", [&] { return pipeline_glyph(cfg); });
    const AngleGrid grid = make_angle_grid(cfg.max_angle_deg, cfg.step_deg);
    CanonOptions canon_opts;
    canon_opts.alias_min_distance = cfg.alias_min_distance;
    canon_opts.glyph_id = cfg.glyph.pgm_path.empty()
                              ? "procedural:" + std::to_string(cfg.glyph.width) + "x" +
                                    std::to_string(cfg.glyph.height)
                              : cfg.glyph.pgm_path;
    const Dataset canon = stage("canon", [&] { return generate_canon(glyph, grid, canon_opts); });
    report.timings.canon_gen_s = detail::seconds_since(t0);

    // train/test replication
    t0 = std::chrono::steady_clock::now();
    const std::uint64_t train_seed = combine_seeds(cfg.seeds.data, cfg.seeds.shuffle, 1);
    const std::uint64_t test_seed = combine_seeds(cfg.seeds.data, cfg.seeds.shuffle, 2);
    const Dataset train_set = stage("replicate-train", [&] {
        return replicate(canon, cfg.num_train_copies, cfg.train_noise, train_seed);
    });
    const Dataset test_set = stage("replicate-test", [&] {
        return replicate(canon, cfg.num_test_copies, cfg.test_noise, test_seed);
    });
    report.timings.gen_train_test_s = detail::seconds_since(t0);

    // train + evaluate
    t0 = std::chrono::steady_clock::now();
    ModelConfig mc = cfg.model;
    mc.input_w = glyph.width;
    mc.input_h = glyph.height;
    mc.num_classes = grid.num_classes();
    auto model = init_model<float>(mc, cfg.seeds.init);
    report.history = stage("train", [&] { return train(model, train_set); });
    const EvalMetrics metrics = stage("evaluate", [&] { return evaluate(model, test_set); });
    report.test_accuracy = metrics.accuracy;
    report.test_loss = metrics.mean_loss;
    report.timings.run_train_test_s = detail::seconds_since(t0);

    // model save
    t0 = std::chrono::steady_clock::now();
    if (cfg.save_artifacts) {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(cfg.output_dir, ec);
        report.model_path = (fs::path(cfg.output_dir) / "model.gnm").string();
        stage("model-save", [&] {
            save_model(model, report.model_path);
            return 0;
        });
    } else {
        // still measure serialization cost, through a scratch file
        const auto tmp = std::filesystem::temp_directory_path() / "bankread_scratch_model.gnm";
        save_model(model, tmp.string());
        std::filesystem::remove(tmp);
    }
    report.timings.model_save_s = detail::seconds_since(t0);

    // batched inference over the whole test set
    t0 = std::chrono::steady_clock::now();
    {
        std::vector<GrayImage> images;
        images.reserve(test_set.samples.size());
        for (const auto& s : test_set.samples) images.push_back(s.image);
        const auto preds = predict_batch(model, images, mc.batch_size);
        (void)preds;
    }
    report.timings.test_infer_s = detail::seconds_since(t0);
    report.inference_fps = report.timings.test_infer_s > 0.0
                               ? static_cast<double>(test_set.count()) / report.timings.test_infer_s
                               : 0.0;

    // single-image exhibit at the canon angle nearest -12 degrees
    t0 = std::chrono::steady_clock::now();
    {
        double target = grid.angles.front();
        for (double a : grid.angles)
            if (std::fabs(a - (-12.0)) < std::fabs(target - (-12.0))) target = a;
        report.sample_actual_angle = target;
        report.sample_readout =
            read_bank_angle(model, rotate_about_center(glyph, target), grid);
    }
    report.timings.single_image_infer_s = detail::seconds_since(t0);

    report.total_wall_s = detail::seconds_since(t_start);
    return report;
}

// --- JSON serialization -----------------------------------------------

inline nlohmann::json to_json(const std::optional<NoiseSpec>& noise) {
    if (!noise) return nullptr;
    return {{"kind", to_string(noise->kind)}, {"level", noise->level}};
}

inline std::optional<NoiseSpec> noise_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    NoiseSpec spec;
    spec.kind = noise_kind_from_string(j.at("kind").get<std::string>());
    spec.level = j.at("level").get<double>();
    validate_noise(spec);
    return spec;
}

inline nlohmann::json to_json(const ModelConfig& m) {
    return {{"input_h", m.input_h},
            {"input_w", m.input_w},
            {"conv1_filters", m.conv1_filters},
            {"conv2_filters", m.conv2_filters},
            {"kernel", m.kernel},
            {"pool", m.pool},
            {"dense_units", m.dense_units},
            {"num_classes", m.num_classes},
            {"optimizer", m.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
            {"learning_rate", m.learning_rate},
            {"batch_size", m.batch_size},
            {"epochs", m.epochs}};
}

inline nlohmann::json to_json(const PipelineConfig& c) {
    return {{"glyph",
             {{"width", c.glyph.width},
              {"height", c.glyph.height},
              {"pgm_path", c.glyph.pgm_path.empty() ? nlohmann::json(nullptr)
                                                    : nlohmann::json(c.glyph.pgm_path)}}},
            {"grid", {{"max_deg", c.max_angle_deg}, {"step_deg", c.step_deg}}},
            {"num_train_copies", c.num_train_copies},
            {"num_test_copies", c.num_test_copies},
            {"train_noise", to_json(c.train_noise)},
            {"test_noise", to_json(c.test_noise)},
            {"alias_min_distance", c.alias_min_distance},
            {"model", to_json(c.model)},
            {"seeds",
             {{"data", c.seeds.data}, {"init", c.seeds.init}, {"shuffle", c.seeds.shuffle}}},
            {"output_dir", c.output_dir}};
}

inline void apply_json(const nlohmann::json& j, ModelConfig& m) {
    if (j.contains("conv1_filters")) m.conv1_filters = j["conv1_filters"].get<int>();
    if (j.contains("conv2_filters")) m.conv2_filters = j["conv2_filters"].get<int>();
    if (j.contains("kernel")) m.kernel = j["kernel"].get<int>();
    if (j.contains("pool")) m.pool = j["pool"].get<int>();
    if (j.contains("dense_units")) m.dense_units = j["dense_units"].get<int>();
    if (j.contains("optimizer"))
        m.optimizer = j["optimizer"].get<std::string>() == "sgd" ? OptimizerKind::sgd
                                                                 : OptimizerKind::adam;
    if (j.contains("learning_rate")) m.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) m.batch_size = j["batch_size"].get<int>();
    if (j.contains("epochs")) m.epochs = j["epochs"].get<int>();
}

// Merges a JSON config file into defaults; CLI flags are applied on top by
// the caller. Unknown keys are rejected to catch typos.
inline void apply_json(const nlohmann::json& j, PipelineConfig& c) {
    static const std::vector<std::string> known = {
        "glyph",       "grid",          "num_train_copies", "num_test_copies",
        "train_noise", "test_noise",    "alias_min_distance", "model",
        "seeds",       "output_dir"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw InvalidArgument("config: unknown key '" + key + "'");
    if (j.contains("glyph")) {
        const auto& g = j["glyph"];
        if (g.contains("width")) c.glyph.width = g["width"].get<int>();
        if (g.contains("height")) c.glyph.height = g["height"].get<int>();
        if (g.contains("pgm_path") && !g["pgm_path"].is_null())
            c.glyph.pgm_path = g["pgm_path"].get<std::string>();
    }
    if (j.contains("grid")) {
        if (j["grid"].contains("max_deg")) c.max_angle_deg = j["grid"]["max_deg"].get<double>();
        if (j["grid"].contains("step_deg")) c.step_deg = j["grid"]["step_deg"].get<double>();
    }
    if (j.contains("num_train_copies")) c.num_train_copies = j["num_train_copies"].get<int>();
    if (j.contains("num_test_copies")) c.num_test_copies = j["num_test_copies"].get<int>();
    if (j.contains("train_noise")) c.train_noise = noise_from_json(j["train_noise"]);
    if (j.contains("test_noise")) c.test_noise = noise_from_json(j["test_noise"]);
    if (j.contains("alias_min_distance"))
        c.alias_min_distance = j["alias_min_distance"].get<double>();
    if (j.contains("model")) apply_json(j["model"], c.model);
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        if (s.contains("data")) c.seeds.data = s["data"].get<std::uint64_t>();
        if (s.contains("init")) c.seeds.init = s["init"].get<std::uint64_t>();
        if (s.contains("shuffle")) c.seeds.shuffle = s["shuffle"].get<std::uint64_t>();
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
}

inline nlohmann::json to_json(const RunTimings& t) {
    return {{"canon_gen_s", t.canon_gen_s},
            {"gen_train_test_s", t.gen_train_test_s},
            {"run_train_test_s", t.run_train_test_s},
            {"model_save_s", t.model_save_s},
            {"test_infer_s", t.test_infer_s},
            {"single_image_infer_s", t.single_image_infer_s}};
}

// Fig-12-style readout record.
inline nlohmann::json readout_to_json(const Readout& r, std::optional<double> actual_angle) {
    nlohmann::json j = {{"argmax_symbol", r.class_index},
                        {"argmax_angle", r.categorical_angle},
                        {"interp_angle", r.interpolated_angle},
                        {"elapsed_s", r.elapsed_s}};
    if (actual_angle) {
        j["actual_angle"] = *actual_angle;
        j["error_deg"] = std::fabs(r.interpolated_angle - *actual_angle);
    } else {
        j["actual_angle"] = nullptr;
        j["error_deg"] = nullptr;
    }
    return j;
}

inline nlohmann::json to_json(const PipelineReport& r) {
    nlohmann::json history = nlohmann::json::array();
    for (std::size_t i = 0; i < r.history.epochs.size(); ++i) {
        const auto& e = r.history.epochs[i];
        history.push_back({{"epoch", i + 1},
                           {"loss", e.loss},
                           {"accuracy", e.accuracy},
                           {"wall_s", e.wall_s}});
    }
    return {{"config", to_json(r.config)},
            {"test_accuracy", r.test_accuracy},
            {"test_loss", r.test_loss},
            {"train_history", history},
            {"timings", to_json(r.timings)},
            {"total_wall_s", r.total_wall_s},
            {"inference_fps", r.inference_fps},
            {"model_path", r.model_path.empty() ? nlohmann::json(nullptr)
                                                : nlohmann::json(r.model_path)},
            {"sample_readout", readout_to_json(r.sample_readout, r.sample_actual_angle)}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

} // namespace bankread

#endif // BANKREAD_PIPELINE_HPP

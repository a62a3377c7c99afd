// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bankread/bankread.hpp"

using namespace bankread;
namespace fs = std::filesystem;

namespace {

// Small, fast pipeline: 24x24 glyph, 13 classes, a couple of epochs.
PipelineConfig quick_config() {
    PipelineConfig cfg;
    cfg.glyph.width = cfg.glyph.height = 24;
    cfg.max_angle_deg = 90;
    cfg.step_deg = 15;
    cfg.num_train_copies = 8;
    cfg.num_test_copies = 4;
    cfg.model.conv1_filters = 4;
    cfg.model.conv2_filters = 8;
    cfg.model.dense_units = 32;
    cfg.model.epochs = 2;
    cfg.model.batch_size = 16;
    cfg.save_artifacts = false;
    return cfg;
}

} // namespace

TEST_CASE("pipeline: report carries all timing fields and echoes the config") {
    PipelineConfig cfg = quick_config();
    const PipelineReport report = run_pipeline(cfg);

    CHECK(report.timings.canon_gen_s > 0.0);
    CHECK(report.timings.gen_train_test_s > 0.0);
    CHECK(report.timings.run_train_test_s > 0.0);
    CHECK(report.timings.model_save_s > 0.0);
    CHECK(report.timings.test_infer_s > 0.0);
    CHECK(report.timings.single_image_infer_s > 0.0);
    const double sum = report.timings.canon_gen_s + report.timings.gen_train_test_s +
                       report.timings.run_train_test_s + report.timings.model_save_s +
                       report.timings.test_infer_s + report.timings.single_image_infer_s;
    CHECK(sum <= report.total_wall_s);
    CHECK(report.history.epochs.size() == 2);
    CHECK(report.inference_fps > 0.0);

    const auto j = to_json(report);
    CHECK(j["config"]["grid"]["step_deg"] == 15.0);
    CHECK(j["config"]["seeds"]["data"] == 1);
    CHECK(j["config"]["num_train_copies"] == 8);
    for (const char* field : {"canon_gen_s", "gen_train_test_s", "run_train_test_s",
                              "model_save_s", "test_infer_s", "single_image_infer_s"})
        CHECK(j["timings"].contains(field));
    CHECK(j["sample_readout"].contains("argmax_symbol"));
    CHECK(j["sample_readout"].contains("interp_angle"));
    CHECK(j["sample_readout"].contains("elapsed_s"));
}

TEST_CASE("pipeline: identical config+seeds reproduce results and model bytes") {
    const auto dir_a = fs::temp_directory_path() / "bankread_pipe_a";
    const auto dir_b = fs::temp_directory_path() / "bankread_pipe_b";
    PipelineConfig cfg = quick_config();
    cfg.save_artifacts = true;
    cfg.output_dir = dir_a.string();
    const PipelineReport a = run_pipeline(cfg);
    cfg.output_dir = dir_b.string();
    const PipelineReport b = run_pipeline(cfg);

    CHECK(a.test_accuracy == b.test_accuracy);
    CHECK(a.test_loss == b.test_loss);
    REQUIRE(a.history.epochs.size() == b.history.epochs.size());
    for (std::size_t i = 0; i < a.history.epochs.size(); ++i)
        CHECK(a.history.epochs[i].loss == b.history.epochs[i].loss);

    std::ifstream fa(a.model_path, std::ios::binary), fb(b.model_path, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)), {});
    CHECK(bytes_a == bytes_b);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("pipeline: config file round trip and unknown keys") {
    PipelineConfig cfg = quick_config();
    cfg.train_noise = NoiseSpec{NoiseKind::speckle, 0.25};
    const auto j = to_json(cfg);
    PipelineConfig back;
    apply_json(j, back);
    CHECK(back.glyph.width == 24);
    CHECK(back.step_deg == 15.0);
    CHECK(back.num_train_copies == 8);
    REQUIRE(back.train_noise.has_value());
    CHECK(back.train_noise->kind == NoiseKind::speckle);
    CHECK(back.model.conv2_filters == 8);

    nlohmann::json bad = {{"num_train_copiez", 3}};
    PipelineConfig scratch;
    CHECK_THROWS_AS(apply_json(bad, scratch), InvalidArgument);
}

TEST_CASE("sweep: rows ordered as requested, errors recorded per point") {
    PipelineConfig cfg = quick_config();
    cfg.model.epochs = 1;
    // factor large enough that the image shrinks below the kernel
    const SweepReport report = sweep_scale(cfg, {1.0, 3000.0});
    REQUIRE(report.points.size() == 2);
    CHECK(report.parameter == "pixel_reduction_factor");
    CHECK(report.points[0].value == 1.0);
    CHECK(report.points[0].error.empty());
    CHECK(report.points[1].value == 3000.0);
    CHECK_FALSE(report.points[1].error.empty()); // recorded, not thrown

    const std::string csv = to_csv(report);
    CHECK(csv.find("pixel_reduction_factor,test_accuracy") == 0);
    // header + two rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    CHECK_THROWS_AS(sweep_copies(cfg, {}), InvalidArgument);
    CHECK_THROWS_AS(sweep_scale(cfg, {0.5}), InvalidArgument);
}

TEST_CASE("sweep: copies rows carry metrics and time grows with copies") {
    PipelineConfig cfg = quick_config();
    cfg.model.epochs = 2;
    const SweepReport report = sweep_copies(cfg, {2, 16});
    REQUIRE(report.points.size() == 2);
    for (const auto& p : report.points) {
        CHECK(p.error.empty());
        CHECK(p.test_accuracy >= 0.0);
        CHECK(p.train_test_s > 0.0);
        CHECK(p.inference_fps > 0.0);
    }
    // 8x the images should take clearly longer to train
    CHECK(report.points[1].train_test_s > 2.0 * report.points[0].train_test_s);
}

TEST_CASE("sweep: run time tracks the epoch count") {
    PipelineConfig cfg = quick_config();
    const SweepReport report = sweep_epochs(cfg, {1, 4});
    REQUIRE(report.points.size() == 2);
    CHECK(report.points[0].error.empty());
    CHECK(report.points[1].error.empty());
    CHECK(report.points[1].train_test_s > 1.5 * report.points[0].train_test_s);
}

TEST_CASE("min-copies: trivial target returns 1, impossible target throws") {
    PipelineConfig cfg = quick_config();
    cfg.model.epochs = 1;
    const MinCopiesResult r = find_min_copies(cfg, 0.0, 4);
    CHECK(r.min_copies == 1);
    CHECK(r.probes.front().copies == 4); // the hi-bound probe always runs
    CHECK_FALSE(r.probes.empty());

    CHECK_THROWS_AS(find_min_copies(cfg, 1.01, 2), UnreachableTarget);
}

TEST_CASE("min-copies: result meets target; largest failing probe below it") {
    PipelineConfig cfg = quick_config();
    cfg.step_deg = 30; // 7 classes: reachable target at this tiny budget
    cfg.model.epochs = 10;
    const MinCopiesResult r = find_min_copies(cfg, 0.5, 8);
    double at_result = -1.0;
    int largest_fail_below = -1;
    for (const auto& p : r.probes) {
        if (p.copies == r.min_copies) at_result = p.test_accuracy;
        if (p.copies < r.min_copies && p.test_accuracy < 0.5)
            largest_fail_below = std::max(largest_fail_below, p.copies);
    }
    CHECK(at_result >= 0.5);
    if (r.min_copies > 1) CHECK(largest_fail_below >= 0);
}

TEST_CASE("clean-vs-noisy: zero noise level makes all four cells equal") {
    PipelineConfig cfg = quick_config();
    cfg.model.epochs = 1;
    const CleanNoisyReport r = clean_vs_noisy(cfg, {NoiseKind::gaussian, 0.0});
    CHECK(r.clean_train_clean_test == r.clean_train_noisy_test);
    CHECK(r.clean_train_clean_test == r.noisy_train_clean_test);
    CHECK(r.clean_train_clean_test == r.noisy_train_noisy_test);

    const auto j = to_json(r);
    CHECK(j["noise"]["kind"] == "gaussian");
    CHECK(j["seeds"]["data"] == 1);
    CHECK(j["matrix"].contains("noisy_train_clean_test"));
}

TEST_CASE("bench: input guards and repetition bookkeeping") {
    PipelineConfig cfg = quick_config();
    const GrayImage glyph = pipeline_glyph(cfg);
    ModelConfig mc = cfg.model;
    mc.input_h = mc.input_w = 24;
    mc.num_classes = 13;
    const auto model = init_model<float>(mc, 5);

    CHECK_THROWS_AS(bench_inference(model, glyph, 90.0, 50, 8), InvalidArgument);
    CHECK_THROWS_AS(bench_inference(model, glyph, 90.0, 100, 8, 1), InvalidArgument);

    const BenchResult r = bench_inference(model, glyph, 90.0, 100, 8, 3);
    CHECK(r.per_rep_fps.size() == 3);
    CHECK(r.fps > 0.0);
    CHECK(r.first_rep_fps == r.per_rep_fps[0]);
    const auto j = to_json(r);
    CHECK(j["images"] == 100);
    CHECK(j["fps"] > 0.0);
}

TEST_CASE("pipeline: stage errors name the stage") {
    PipelineConfig cfg = quick_config();
    cfg.glyph.pgm_path = "/nonexistent/glyph.pgm";
    CHECK_THROWS_AS(run_pipeline(cfg), IoError);

    PipelineConfig bad_grid = quick_config();
    bad_grid.step_deg = 7; // does not divide 180
    CHECK_THROWS_AS(run_pipeline(bad_grid), InvalidArgument);
}

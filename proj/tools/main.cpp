// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

// bankread CLI: synthesize gauge datasets from a single glyph, train the
// bank-angle classifier, decode angles from images, and run the
// hyperparameter studies. Subcommands: glyph, dataset, train, infer,
// sweep, clean-vs-noisy, bench, min-copies.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "bankread/bankread.hpp"

namespace fs = std::filesystem;
using namespace bankread;

namespace {

struct CommonFlags {
    std::string config_path;
    int width = 64;
    int height = 64;
    std::string glyph_pgm;
    double max_angle = 90.0;
    double step = 3.0;
    int copies = 20;
    int test_copies = 10;
    std::string train_noise;
    std::string test_noise;
    int epochs = 5;
    int batch = 32;
    double lr = 1e-3;
    int conv1 = 32;
    int conv2 = 128;
    int kernel = 3;
    int pool = 2;
    int dense = 128;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 0;
};

// Pipeline-config flags shared by the training-style subcommands. Flags
// override whatever the optional JSON config file set. clean-vs-noisy
// opts out of --noise because the study itself owns that flag.
void add_common_flags(CLI::App* cmd, CommonFlags& f, bool include_noise = true) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
    cmd->add_option("--width", f.width, "procedural glyph width")->capture_default_str();
    cmd->add_option("--height", f.height, "procedural glyph height")->capture_default_str();
    cmd->add_option("--glyph-pgm", f.glyph_pgm, "use this PGM as the glyph instead");
    cmd->add_option("--max-angle", f.max_angle, "max bank angle, degrees")->capture_default_str();
    cmd->add_option("--step", f.step, "grid step, degrees")->capture_default_str();
    cmd->add_option("--copies", f.copies, "training copies per canon image")
        ->capture_default_str();
    cmd->add_option("--test-copies", f.test_copies, "test copies per canon image")
        ->capture_default_str();
    if (include_noise) {
        cmd->add_option("--noise", f.train_noise, "training noise, kind:level");
        cmd->add_option("--test-noise", f.test_noise, "test noise, kind:level");
    }
    cmd->add_option("--epochs", f.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch", f.batch, "minibatch size")->capture_default_str();
    cmd->add_option("--lr", f.lr, "learning rate")->capture_default_str();
    cmd->add_option("--conv1", f.conv1, "first conv layer filters")->capture_default_str();
    cmd->add_option("--conv2", f.conv2, "second conv layer filters")->capture_default_str();
    cmd->add_option("--kernel", f.kernel, "conv kernel size")->capture_default_str();
    cmd->add_option("--pool", f.pool, "max-pool window")->capture_default_str();
    cmd->add_option("--dense", f.dense, "dense layer units")->capture_default_str();
    cmd->add_option("--seed", f.seed, "master seed; data/init/shuffle seeds derive from it")
        ->capture_default_str();
    cmd->add_option("--out-dir", f.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)")
        ->capture_default_str();
}

PipelineConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
    PipelineConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw IoError("cannot open config file '" + f.config_path + "'");
        nlohmann::json j;
        in >> j;
        apply_json(j, cfg);
    }
    auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (given("--width")) cfg.glyph.width = f.width;
    if (given("--height")) cfg.glyph.height = f.height;
    if (given("--glyph-pgm")) cfg.glyph.pgm_path = f.glyph_pgm;
    if (given("--max-angle")) cfg.max_angle_deg = f.max_angle;
    if (given("--step")) cfg.step_deg = f.step;
    if (given("--copies")) cfg.num_train_copies = f.copies;
    if (given("--test-copies")) cfg.num_test_copies = f.test_copies;
    if (cmd->get_option_no_throw("--noise") && given("--noise"))
        cfg.train_noise = parse_noise_spec(f.train_noise);
    if (cmd->get_option_no_throw("--test-noise") && given("--test-noise"))
        cfg.test_noise = parse_noise_spec(f.test_noise);
    if (given("--epochs")) cfg.model.epochs = f.epochs;
    if (given("--batch")) cfg.model.batch_size = f.batch;
    if (given("--lr")) cfg.model.learning_rate = f.lr;
    if (given("--conv1")) cfg.model.conv1_filters = f.conv1;
    if (given("--conv2")) cfg.model.conv2_filters = f.conv2;
    if (given("--kernel")) cfg.model.kernel = f.kernel;
    if (given("--pool")) cfg.model.pool = f.pool;
    if (given("--dense")) cfg.model.dense_units = f.dense;
    if (given("--seed")) {
        cfg.seeds.data = derive_seed(f.seed, 1);
        cfg.seeds.init = derive_seed(f.seed, 2);
        cfg.seeds.shuffle = derive_seed(f.seed, 3);
    }
    if (given("--out-dir")) cfg.output_dir = f.out_dir;
    if (given("--threads")) set_thread_count(f.threads);
    return cfg;
}

std::vector<double> parse_value_list(const std::string& csv) {
    std::vector<double> values;
    std::size_t at = 0;
    while (at < csv.size()) {
        const auto comma = csv.find(',', at);
        const std::string tok = csv.substr(at, comma == std::string::npos ? csv.size() - at
                                                                          : comma - at);
        try {
            values.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InvalidArgument("bad value '" + tok + "' in list '" + csv + "'");
        }
        if (comma == std::string::npos) break;
        at = comma + 1;
    }
    if (values.empty()) throw InvalidArgument("empty value list");
    return values;
}

std::vector<int> to_int_list(const std::vector<double>& values) {
    std::vector<int> out;
    for (double v : values) out.push_back(static_cast<int>(std::lround(v)));
    return out;
}

void emit(const nlohmann::json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json(j, path);
        std::fprintf(stderr, "wrote %s\n", path.c_str());
    }
}

// --- subcommand bodies ---------------------------------------------------

int cmd_glyph(const CLI::App* cmd, const CommonFlags& f, const std::string& out_pgm,
              const std::string& inspect, bool check, double min_distance) {
    const PipelineConfig cfg = build_config(cmd, f);
    if (!inspect.empty()) {
        const GrayImage img = load_pgm(inspect);
        double lo = 1.0, hi = 0.0, sum = 0.0;
        for (float p : img.pixels) {
            lo = std::min(lo, static_cast<double>(p));
            hi = std::max(hi, static_cast<double>(p));
            sum += p;
        }
        nlohmann::json j = {{"path", inspect},
                            {"width", img.width},
                            {"height", img.height},
                            {"min", lo},
                            {"max", hi},
                            {"mean", sum / static_cast<double>(img.size())}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    const GrayImage glyph = pipeline_glyph(cfg);
    if (check) {
        const AngleGrid grid = make_angle_grid(cfg.max_angle_deg, cfg.step_deg);
        const AliasReport report = check_rotational_aliasing(glyph, grid, min_distance);
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& p : report.collisions)
            pairs.push_back({{"angle_i", p.angle_i}, {"angle_j", p.angle_j}, {"rms", p.rms}});
        nlohmann::json j = {{"passed", report.passed()},
                            {"min_distance", min_distance},
                            {"collisions", pairs}};
        std::cout << j.dump(2) << "\n";
        if (!report.passed()) return 9;
    }
    if (!out_pgm.empty()) {
        save_pgm(glyph, out_pgm);
        std::fprintf(stderr, "wrote %s (%dx%d)\n", out_pgm.c_str(), glyph.width, glyph.height);
    }
    return 0;
}

int cmd_dataset(const CLI::App* cmd, const CommonFlags& f, const std::string& out_gds,
                const std::string& in_gds, const std::string& export_dir,
                const std::string& idx_images, const std::string& idx_labels, bool info) {
    const PipelineConfig cfg = build_config(cmd, f);
    Dataset ds;
    if (!in_gds.empty()) {
        ds = load_dataset(in_gds);
    } else if (!idx_images.empty()) {
        if (idx_labels.empty()) throw InvalidArgument("--idx-labels required with --idx-images");
        ds = load_idx(idx_images, idx_labels);
    } else {
        const GrayImage glyph = pipeline_glyph(cfg);
        const AngleGrid grid = make_angle_grid(cfg.max_angle_deg, cfg.step_deg);
        CanonOptions opts;
        opts.alias_min_distance = cfg.alias_min_distance;
        const Dataset canon = generate_canon(glyph, grid, opts);
        ds = replicate(canon, cfg.num_train_copies, cfg.train_noise,
                       combine_seeds(cfg.seeds.data, cfg.seeds.shuffle, 1));
    }
    if (info) {
        nlohmann::json j = {{"samples", ds.count()},
                            {"classes", ds.grid.num_classes()},
                            {"width", ds.image_width()},
                            {"height", ds.image_height()},
                            {"interpolatable", ds.interpolatable}};
        std::cout << j.dump(2) << "\n";
    }
    if (!out_gds.empty()) {
        save_dataset(ds, out_gds);
        std::fprintf(stderr, "wrote %s (%d samples)\n", out_gds.c_str(), ds.count());
    }
    if (!export_dir.empty()) {
        export_dataset(ds, export_dir);
        std::fprintf(stderr, "exported %d samples to %s\n", ds.count(), export_dir.c_str());
    }
    return 0;
}

int cmd_train(const CLI::App* cmd, const CommonFlags& f, const std::string& report_path) {
    const PipelineConfig cfg = build_config(cmd, f);
    const PipelineReport report = run_pipeline(cfg);
    emit(to_json(report),
         report_path.empty() ? (fs::path(cfg.output_dir) / "report.json").string() : report_path);
    std::fprintf(stderr, "test accuracy %.4f, model at %s\n", report.test_accuracy,
                 report.model_path.c_str());
    return 0;
}

int cmd_infer(const std::string& model_path, const std::string& image_path,
              const CLI::App* cmd, double actual, const CommonFlags& f) {
    if (cmd->count("--threads")) set_thread_count(f.threads);
    const Model<float> model = load_model(model_path);
    const GrayImage image = load_pgm(image_path);
    const AngleGrid grid = make_angle_grid(f.max_angle, f.step);
    if (grid.num_classes() != model.config.num_classes)
        throw InvalidArgument("grid (" + std::to_string(grid.num_classes()) +
                              " classes) does not match the model (" +
                              std::to_string(model.config.num_classes) + ")");
    const Readout r = read_bank_angle(model, image, grid);
    const std::optional<double> actual_angle =
        cmd->count("--actual") ? std::optional<double>(actual) : std::nullopt;
    std::cout << readout_to_json(r, actual_angle).dump(2) << "\n";
    return 0;
}

int cmd_sweep(const CLI::App* cmd, const CommonFlags& f, const std::string& kind,
              const std::string& values_csv, const std::string& out_json,
              const std::string& out_csv) {
    PipelineConfig cfg = build_config(cmd, f);
    cfg.save_artifacts = false;
    const std::vector<double> values = parse_value_list(values_csv);
    SweepReport report;
    if (kind == "copies")
        report = sweep_copies(cfg, to_int_list(values));
    else if (kind == "epochs")
        report = sweep_epochs(cfg, to_int_list(values));
    else if (kind == "scale")
        report = sweep_scale(cfg, values);
    else
        throw InvalidArgument("sweep kind must be copies|epochs|scale, got '" + kind + "'");
    emit(to_json(report), out_json);
    if (!out_csv.empty()) {
        std::ofstream out(out_csv, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + out_csv + "' for writing");
        out << to_csv(report);
        std::fprintf(stderr, "wrote %s\n", out_csv.c_str());
    }
    return 0;
}

int cmd_clean_vs_noisy(const CLI::App* cmd, const CommonFlags& f, const std::string& noise_arg,
                       const std::string& out_json) {
    PipelineConfig cfg = build_config(cmd, f);
    cfg.save_artifacts = false;
    const NoiseSpec noise = parse_noise_spec(noise_arg);
    const CleanNoisyReport report = clean_vs_noisy(cfg, noise);
    emit(to_json(report), out_json);
    return 0;
}

int cmd_bench(const CommonFlags& f, const std::string& model_path, int images, int batch,
              int reps, std::uint64_t bench_seed, const std::string& out_json) {
    set_thread_count(f.threads);
    const Model<float> model = load_model(model_path);
    const GrayImage glyph = f.glyph_pgm.empty() ? make_default_glyph(f.width, f.height)
                                                : load_pgm(f.glyph_pgm);
    const BenchResult r =
        bench_inference(model, glyph, f.max_angle, images, batch, reps, bench_seed);
    emit(to_json(r), out_json);
    std::fprintf(stderr, "fps %.1f (first rep %.1f discarded)\n", r.fps, r.first_rep_fps);
    return 0;
}

int cmd_min_copies(const CLI::App* cmd, const CommonFlags& f, double target, int hi,
                   const std::string& out_json) {
    PipelineConfig cfg = build_config(cmd, f);
    cfg.save_artifacts = false;
    const MinCopiesResult r = find_min_copies(cfg, target, hi);
    emit(to_json(r), out_json);
    std::fprintf(stderr, "min copies %d for target %.4f\n", r.min_copies, target);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bankread: read analog gauge bank angles with a small CNN"};
    app.require_subcommand(1);

    CommonFlags f;

    auto* glyph_cmd = app.add_subcommand("glyph", "generate, inspect or alias-check a glyph PGM");
    std::string glyph_out, glyph_inspect;
    bool glyph_check = false;
    double glyph_min_distance = 0.01;
    add_common_flags(glyph_cmd, f);
    glyph_cmd->add_option("--out", glyph_out, "write the glyph as a PGM");
    glyph_cmd->add_option("--inspect", glyph_inspect, "print stats of an existing PGM");
    glyph_cmd->add_flag("--check", glyph_check, "run the rotational aliasing scan");
    glyph_cmd->add_option("--min-distance", glyph_min_distance, "aliasing RMS threshold")
        ->capture_default_str();

    auto* dataset_cmd = app.add_subcommand("dataset", "canon + replicate, save/load/export, IDX");
    std::string ds_out, ds_in, ds_export, ds_idx_images, ds_idx_labels;
    bool ds_info = false;
    add_common_flags(dataset_cmd, f);
    dataset_cmd->add_option("--out", ds_out, "write dataset (GDS1)");
    dataset_cmd->add_option("--in", ds_in, "load an existing GDS1 dataset");
    dataset_cmd->add_option("--export-dir", ds_export, "export samples as PGM + labels.csv");
    dataset_cmd->add_option("--idx-images", ds_idx_images, "ingest IDX image file");
    dataset_cmd->add_option("--idx-labels", ds_idx_labels, "ingest IDX label file");
    dataset_cmd->add_flag("--info", ds_info, "print dataset summary");

    auto* train_cmd = app.add_subcommand("train", "run the full pipeline through model save");
    std::string train_report;
    add_common_flags(train_cmd, f);
    train_cmd->add_option("--report", train_report,
                          "report JSON path (default out-dir/report.json)");

    auto* infer_cmd = app.add_subcommand("infer", "read the bank angle from one image");
    std::string infer_model, infer_image;
    double infer_actual = 0.0;
    infer_cmd->add_option("--model", infer_model, "trained model (GNM1)")->required();
    infer_cmd->add_option("--image", infer_image, "input PGM image")->required();
    infer_cmd->add_option("--actual", infer_actual, "true angle, for the error field");
    infer_cmd->add_option("--max-angle", f.max_angle, "grid max angle")->capture_default_str();
    infer_cmd->add_option("--step", f.step, "grid step")->capture_default_str();
    infer_cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");

    auto* sweep_cmd = app.add_subcommand("sweep", "sweep copies|epochs|scale over a value list");
    std::string sweep_kind, sweep_values, sweep_json, sweep_csv;
    add_common_flags(sweep_cmd, f);
    sweep_cmd->add_option("kind", sweep_kind, "copies|epochs|scale")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep_cmd->add_option("--out-json", sweep_json, "sweep report JSON (default stdout)");
    sweep_cmd->add_option("--out-csv", sweep_csv, "sweep table CSV");

    auto* cvn_cmd = app.add_subcommand("clean-vs-noisy", "2x2 clean/noisy training study");
    std::string cvn_noise = "gaussian:0.1", cvn_json;
    add_common_flags(cvn_cmd, f, /*include_noise=*/false);
    cvn_cmd->add_option("--noise", cvn_noise, "noise spec, kind:level")->capture_default_str();
    cvn_cmd->add_option("--out-json", cvn_json, "report JSON (default stdout)");

    auto* bench_cmd = app.add_subcommand("bench", "inference throughput benchmark");
    std::string bench_model, bench_json;
    int bench_images = 1000, bench_batch = 32, bench_reps = 5;
    std::uint64_t bench_seed = 42;
    bench_cmd->add_option("--model", bench_model, "trained model (GNM1)")->required();
    bench_cmd->add_option("--images", bench_images, "images per repetition (>= 100)")
        ->capture_default_str();
    bench_cmd->add_option("--batch", bench_batch, "prediction batch size")->capture_default_str();
    bench_cmd->add_option("--reps", bench_reps, "timed repetitions; first is discarded")
        ->capture_default_str();
    bench_cmd->add_option("--bench-seed", bench_seed, "seed for the random angles")
        ->capture_default_str();
    bench_cmd->add_option("--width", f.width, "glyph width for rendered samples")
        ->capture_default_str();
    bench_cmd->add_option("--height", f.height, "glyph height")->capture_default_str();
    bench_cmd->add_option("--glyph-pgm", f.glyph_pgm, "render from this PGM glyph");
    bench_cmd->add_option("--max-angle", f.max_angle, "render angle range")->capture_default_str();
    bench_cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    bench_cmd->add_option("--out-json", bench_json, "result JSON (default stdout)");

    auto* min_cmd = app.add_subcommand("min-copies", "binary search the minimum copy count");
    double min_target = 1.0;
    int min_hi = 200;
    std::string min_json;
    add_common_flags(min_cmd, f);
    min_cmd->add_option("--target", min_target, "target test accuracy")->capture_default_str();
    min_cmd->add_option("--hi", min_hi, "upper bound on copies")->capture_default_str();
    min_cmd->add_option("--out-json", min_json, "result JSON (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (glyph_cmd->parsed())
            return cmd_glyph(glyph_cmd, f, glyph_out, glyph_inspect, glyph_check,
                             glyph_min_distance);
        if (dataset_cmd->parsed())
            return cmd_dataset(dataset_cmd, f, ds_out, ds_in, ds_export, ds_idx_images,
                               ds_idx_labels, ds_info);
        if (train_cmd->parsed()) return cmd_train(train_cmd, f, train_report);
        if (infer_cmd->parsed())
            return cmd_infer(infer_model, infer_image, infer_cmd, infer_actual, f);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_cmd, f, sweep_kind, sweep_values, sweep_json, sweep_csv);
        if (cvn_cmd->parsed()) return cmd_clean_vs_noisy(cvn_cmd, f, cvn_noise, cvn_json);
        if (bench_cmd->parsed())
            return cmd_bench(f, bench_model, bench_images, bench_batch, bench_reps, bench_seed,
                             bench_json);
        if (min_cmd->parsed()) return cmd_min_copies(min_cmd, f, min_target, min_hi, min_json);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

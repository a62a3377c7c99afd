// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_SWEEPS_HPP
#define BANKREAD_SWEEPS_HPP

#include <cmath>
#include <sstream>

#include "bankread/pipeline.hpp"

namespace bankread {

// One pipeline run inside a sweep. On failure `error` carries the message
// and the metric fields are meaningless.
struct SweepPoint {
    double value = 0.0;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    double train_test_s = 0.0;
    double inference_fps = 0.0;
    std::string error;
};

struct SweepReport {
    std::string parameter;
    std::vector<SweepPoint> points; // ordered as requested
};

namespace detail {

template <class MakeConfig>
SweepReport run_sweep(const std::string& parameter, const std::vector<double>& values,
                      MakeConfig&& make_config) {
    if (values.empty()) throw InvalidArgument("sweep: value list is empty");
    SweepReport report;
    report.parameter = parameter;
    for (const double v : values) {
        SweepPoint point;
        point.value = v;
        try {
            PipelineConfig cfg = make_config(v);
            cfg.save_artifacts = false; // sweeps are measurement-only
            const PipelineReport r = run_pipeline(cfg);
            point.test_accuracy = r.test_accuracy;
            point.test_loss = r.test_loss;
            point.train_test_s = r.timings.run_train_test_s;
            point.inference_fps = r.inference_fps;
        } catch (const std::exception& e) {
            point.error = e.what();
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

} // namespace detail

// Accuracy/loss/time/fps as the number of canon copies in the training set
// grows. Every point replicates afresh from the same canon and trains a
// fresh model; nothing is shared between points except the configuration.
inline SweepReport sweep_copies(const PipelineConfig& base, const std::vector<int>& copies_list) {
    std::vector<double> values(copies_list.begin(), copies_list.end());
    return detail::run_sweep("num_train_copies", values, [&](double v) {
        PipelineConfig cfg = base;
        cfg.num_train_copies = static_cast<int>(v);
        return cfg;
    });
}

inline SweepReport sweep_epochs(const PipelineConfig& base, const std::vector<int>& epoch_counts) {
    std::vector<double> values(epoch_counts.begin(), epoch_counts.end());
    return detail::run_sweep("epochs", values, [&](double v) {
        PipelineConfig cfg = base;
        cfg.model.epochs = static_cast<int>(v);
        return cfg;
    });
}

// Shrinks the pixel count by each factor f: the resolved glyph (and with it
// every synthesized sample) is resized by 1/sqrt(f) per linear dimension.
inline SweepReport sweep_scale(const PipelineConfig& base,
                               const std::vector<double>& pixel_reduction_factors) {
    for (const double f : pixel_reduction_factors)
        if (f < 1.0) throw InvalidArgument("sweep_scale: factors must be >= 1");
    const GrayImage glyph = pipeline_glyph(base);
    return detail::run_sweep("pixel_reduction_factor", pixel_reduction_factors, [&](double f) {
        PipelineConfig cfg = base;
        const double shrink = std::sqrt(f);
        cfg.glyph.resize_width = std::max(1, static_cast<int>(std::lround(glyph.width / shrink)));
        cfg.glyph.resize_height = std::max(1, static_cast<int>(std::lround(glyph.height / shrink)));
        return cfg;
    });
}

struct MinCopiesProbe {
    int copies = 0;
    double test_accuracy = 0.0;
};

struct MinCopiesResult {
    int min_copies = 0;
    double target_accuracy = 0.0;
    std::vector<MinCopiesProbe> probes; // in probe order
};

// Binary search for the smallest copy count whose pipeline run meets the
// target accuracy, assuming accuracy is monotone in copies. Every probe is
// logged so a violated assumption shows up in the report instead of being
// silently mis-answered.
inline MinCopiesResult find_min_copies(const PipelineConfig& base, double target_accuracy,
                                       int hi) {
    if (hi < 1) throw InvalidArgument("find_min_copies: hi must be >= 1");
    MinCopiesResult result;
    result.target_accuracy = target_accuracy;

    auto probe = [&](int copies) {
        PipelineConfig cfg = base;
        cfg.num_train_copies = copies;
        cfg.save_artifacts = false;
        const PipelineReport r = run_pipeline(cfg);
        result.probes.push_back({copies, r.test_accuracy});
        return r.test_accuracy;
    };

    if (probe(hi) < target_accuracy)
        throw UnreachableTarget("find_min_copies: target accuracy " +
                                std::to_string(target_accuracy) + " not met at hi = " +
                                std::to_string(hi) + " copies");
    int lo = 1, hi_bound = hi;
    while (lo < hi_bound) {
        const int mid = lo + (hi_bound - lo) / 2;
        if (probe(mid) >= target_accuracy)
            hi_bound = mid;
        else
            lo = mid + 1;
    }
    result.min_copies = lo;
    return result;
}

// 2x2 accuracy matrix over {clean,noisy} training x {clean,noisy} test.
struct CleanNoisyReport {
    NoiseSpec noise;
    Seeds seeds;
    double clean_train_clean_test = 0.0;
    double clean_train_noisy_test = 0.0;
    double noisy_train_clean_test = 0.0;
    double noisy_train_noisy_test = 0.0;
};

// Trains one model on clean replicas and one on noise-injected replicas of
// the same canon, then evaluates both on a clean test set and on a test set
// noised with a fresh seed.
inline CleanNoisyReport clean_vs_noisy(const PipelineConfig& base, const NoiseSpec& noise) {
    validate_noise(noise);
    CleanNoisyReport report;
    report.noise = noise;
    report.seeds = base.seeds;

    const GrayImage glyph = pipeline_glyph(base);
    const AngleGrid grid = make_angle_grid(base.max_angle_deg, base.step_deg);
    CanonOptions canon_opts;
    canon_opts.alias_min_distance = base.alias_min_distance;
    const Dataset canon = generate_canon(glyph, grid, canon_opts);

    const std::uint64_t train_seed = combine_seeds(base.seeds.data, base.seeds.shuffle, 1);
    const std::uint64_t test_seed = combine_seeds(base.seeds.data, base.seeds.shuffle, 2);
    const std::uint64_t noisy_test_seed = combine_seeds(base.seeds.data, base.seeds.shuffle, 3);

    const Dataset clean_train = replicate(canon, base.num_train_copies, std::nullopt, train_seed);
    const Dataset noisy_train = replicate(canon, base.num_train_copies, noise, train_seed);
    const Dataset clean_test = replicate(canon, base.num_test_copies, std::nullopt, test_seed);
    const Dataset noisy_test = replicate(canon, base.num_test_copies, noise, noisy_test_seed);

    ModelConfig mc = base.model;
    mc.input_w = glyph.width;
    mc.input_h = glyph.height;
    mc.num_classes = grid.num_classes();

    auto clean_model = init_model<float>(mc, base.seeds.init);
    train(clean_model, clean_train);
    auto noisy_model = init_model<float>(mc, base.seeds.init);
    train(noisy_model, noisy_train);

    report.clean_train_clean_test = evaluate(clean_model, clean_test).accuracy;
    report.clean_train_noisy_test = evaluate(clean_model, noisy_test).accuracy;
    report.noisy_train_clean_test = evaluate(noisy_model, clean_test).accuracy;
    report.noisy_train_noisy_test = evaluate(noisy_model, noisy_test).accuracy;
    return report;
}

// --- serialization ------------------------------------------------------

inline nlohmann::json to_json(const SweepReport& r) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : r.points)
        points.push_back({{"value", p.value},
                          {"test_accuracy", p.test_accuracy},
                          {"test_loss", p.test_loss},
                          {"train_test_s", p.train_test_s},
                          {"inference_fps", p.inference_fps},
                          {"error", p.error.empty() ? nlohmann::json(nullptr)
                                                    : nlohmann::json(p.error)}});
    return {{"parameter", r.parameter}, {"points", points}};
}

// One row per point; plot-ready.
inline std::string to_csv(const SweepReport& r) {
    std::ostringstream out;
    out << r.parameter << ",test_accuracy,test_loss,train_test_s,inference_fps,error\n";
    for (const auto& p : r.points) {
        out << p.value << "," << p.test_accuracy << "," << p.test_loss << "," << p.train_test_s
            << "," << p.inference_fps << ",";
        for (char ch : p.error)
            out << (ch == ',' ? ';' : ch);
        out << "\n";
    }
    return out.str();
}

inline nlohmann::json to_json(const MinCopiesResult& r) {
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : r.probes)
        probes.push_back({{"copies", p.copies}, {"test_accuracy", p.test_accuracy}});
    return {{"min_copies", r.min_copies},
            {"target_accuracy", r.target_accuracy},
            {"probes", probes}};
}

inline nlohmann::json to_json(const CleanNoisyReport& r) {
    return {{"noise", {{"kind", to_string(r.noise.kind)}, {"level", r.noise.level}}},
            {"seeds",
             {{"data", r.seeds.data}, {"init", r.seeds.init}, {"shuffle", r.seeds.shuffle}}},
            {"matrix",
             {{"clean_train_clean_test", r.clean_train_clean_test},
              {"clean_train_noisy_test", r.clean_train_noisy_test},
              {"noisy_train_clean_test", r.noisy_train_clean_test},
              {"noisy_train_noisy_test", r.noisy_train_noisy_test}}}};
}

} // namespace bankread

#endif // BANKREAD_SWEEPS_HPP

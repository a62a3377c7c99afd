// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_BENCH_HPP
#define BANKREAD_BENCH_HPP

#include <chrono>

#include "bankread/net.hpp"
#include "bankread/prng.hpp"
#include "bankread/warp.hpp"

#include <json.hpp>

namespace bankread {

struct BenchResult {
    int images = 0;
    int batch = 0;
    int reps = 0;
    double fps = 0.0;                // mean over reps after dropping the first
    double first_rep_fps = 0.0;      // the discarded warm-up repetition
    std::vector<double> per_rep_fps; // all repetitions, in order
};

// Times batched prediction over `images` random-angle renders of the glyph
// (render time excluded). The first timed repetition is always discarded
// and the remaining ones averaged, since first runs absorb one-time
// provisioning costs that say nothing about steady-state throughput.
template <class T>
BenchResult bench_inference(const Model<T>& model, const GrayImage& glyph, double max_angle_deg,
                            int images, int batch, int reps = 5, std::uint64_t seed = 42) {
    if (images < 100)
        throw InvalidArgument("bench_inference: need at least 100 images, got " +
                              std::to_string(images));
    if (batch < 1) throw InvalidArgument("bench_inference: batch must be >= 1");
    if (reps < 2) throw InvalidArgument("bench_inference: need >= 2 repetitions (first is discarded)");

    GrayImage base = glyph;
    if (glyph.width != model.config.input_w || glyph.height != model.config.input_h)
        base = resize(glyph, model.config.input_w, model.config.input_h);

    SplitMix64 rng(seed);
    std::vector<GrayImage> renders;
    renders.reserve(static_cast<std::size_t>(images));
    for (int i = 0; i < images; ++i)
        renders.push_back(
            rotate_about_center(base, rng.next_uniform(-max_angle_deg, max_angle_deg)));

    BenchResult result;
    result.images = images;
    result.batch = batch;
    result.reps = reps;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto preds = predict_batch(model, renders, batch);
        const auto t1 = std::chrono::steady_clock::now();
        (void)preds;
        const double s = std::chrono::duration<double>(t1 - t0).count();
        result.per_rep_fps.push_back(s > 0.0 ? images / s : 0.0);
    }
    result.first_rep_fps = result.per_rep_fps.front();
    double acc = 0.0;
    for (int r = 1; r < reps; ++r) acc += result.per_rep_fps[static_cast<std::size_t>(r)];
    result.fps = acc / static_cast<double>(reps - 1);
    return result;
}

inline nlohmann::json to_json(const BenchResult& r) {
    return {{"images", r.images},
            {"batch", r.batch},
            {"reps", r.reps},
            {"fps", r.fps},
            {"first_rep_fps", r.first_rep_fps},
            {"per_rep_fps", r.per_rep_fps}};
}

} // namespace bankread

#endif // BANKREAD_BENCH_HPP

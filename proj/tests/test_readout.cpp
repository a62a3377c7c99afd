// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bankread/glyph.hpp"
#include "bankread/readout.hpp"

using namespace bankread;

namespace {

PredictionVector one_hot(int n, int at) {
    PredictionVector pred;
    pred.probabilities.assign(static_cast<std::size_t>(n), 0.0);
    pred.probabilities[static_cast<std::size_t>(at)] = 1.0;
    return pred;
}

// The vector shown in the worked single-image example: 0.08 and 0.92 on
// the classes bracketing -13 degrees of bank.
PredictionVector bracketing_vector() {
    PredictionVector pred;
    pred.probabilities.assign(61, 0.0);
    pred.probabilities[25] = 0.08;
    pred.probabilities[26] = 0.92;
    return pred;
}

} // namespace

TEST_CASE("argmax: bracketing vector decodes to class 26 / -12 degrees") {
    const AngleGrid grid = make_angle_grid(90, 3);
    const auto [cls, angle] = argmax_readout(bracketing_vector(), grid);
    CHECK(cls == 26);
    CHECK(angle == -12.0);
}

TEST_CASE("argmax: one-hot at zero, and ties break to the lowest index") {
    const AngleGrid grid = make_angle_grid(90, 3);
    const auto [cls, angle] = argmax_readout(one_hot(61, 0), grid);
    CHECK(cls == 0);
    CHECK(angle == -90.0);

    PredictionVector tie;
    tie.probabilities.assign(61, 0.0);
    tie.probabilities[10] = 0.5;
    tie.probabilities[40] = 0.5;
    const auto [tcls, tangle] = argmax_readout(tie, grid);
    CHECK(tcls == 10);
    CHECK(tangle == angle_of_label(grid, 10));

    CHECK_THROWS_AS(argmax_readout(one_hot(60, 0), grid), ShapeMismatch);
}

TEST_CASE("interp: one-hot vectors reproduce the grid angle exactly") {
    const AngleGrid grid = make_angle_grid(90, 3);
    for (int i : {0, 17, 30, 60})
        CHECK(interp_readout(one_hot(61, i), grid) == angle_of_label(grid, i));
}

TEST_CASE("interp: forced by the formula on a 3-angle grid") {
    const AngleGrid grid = make_angle_grid(3, 3);
    PredictionVector pred;
    pred.probabilities = {0.0, 0.5, 0.5};
    CHECK(interp_readout(pred, grid) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("interp: bracketing vector lands at -12.24") {
    const AngleGrid grid = make_angle_grid(90, 3);
    const double angle = interp_readout(bracketing_vector(), grid);
    CHECK(angle == doctest::Approx(-12.24).epsilon(1e-9));
    // two-decimal rounding of the displayed probabilities explains the
    // -12.22 the full-precision vector produced
    CHECK(std::fabs(angle - (-12.22)) < 0.05);
}

TEST_CASE("interp: guards on shape, zero mass and placeholder grids") {
    const AngleGrid grid = make_angle_grid(90, 3);
    CHECK_THROWS_AS(interp_readout(one_hot(60, 0), grid), ShapeMismatch);

    PredictionVector zero;
    zero.probabilities.assign(61, 0.0);
    CHECK_THROWS_AS(interp_readout(zero, grid), InvalidArgument);

    const AngleGrid cat = make_placeholder_grid(10);
    CHECK_THROWS_AS(interp_readout(one_hot(10, 3), cat), InvalidArgument);
    CHECK(argmax_readout(one_hot(10, 3), cat).first == 3); // argmax still fine
}

TEST_CASE("interp: scaling invariance and convex range") {
    const AngleGrid grid = make_angle_grid(90, 3);
    SplitMix64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        PredictionVector pred;
        pred.probabilities.resize(61);
        for (auto& p : pred.probabilities) p = rng.next_unit();
        const double base = interp_readout(pred, grid);
        CHECK(base >= grid.angles.front());
        CHECK(base <= grid.angles.back());

        PredictionVector scaled = pred;
        const double k = 0.001 + 17.0 * rng.next_unit();
        for (auto& p : scaled.probabilities) p *= k;
        CHECK(interp_readout(scaled, grid) == doctest::Approx(base).epsilon(1e-9));
        CHECK(argmax_readout(scaled, grid).first == argmax_readout(pred, grid).first);

        // interpolation of a one-hot equals the categorical angle
        const int cls = argmax_readout(pred, grid).first;
        CHECK(interp_readout(one_hot(61, cls), grid) == angle_of_label(grid, cls));
    }
}

TEST_CASE("missing codes scan: fine step must subdivide the grid step") {
    const AngleGrid grid = make_angle_grid(90, 3);
    // model/glyph are irrelevant: precondition fires first
    ModelConfig cfg;
    cfg.input_h = cfg.input_w = 16;
    cfg.conv1_filters = 2;
    cfg.conv2_filters = 2;
    cfg.kernel = 2;
    cfg.dense_units = 4;
    cfg.num_classes = 61;
    const auto model = init_model<float>(cfg, 1);
    const GrayImage glyph = make_default_glyph(16, 16);
    CHECK_THROWS_AS(missing_codes_scan(model, glyph, grid, 3.0), InvalidArgument);
    CHECK_THROWS_AS(missing_codes_scan(model, glyph, grid, 0.0), InvalidArgument);
}

TEST_CASE("missing codes scan: untrained model misses most classes") {
    const AngleGrid grid = make_angle_grid(90, 15); // 13 classes
    ModelConfig cfg;
    cfg.input_h = cfg.input_w = 20;
    cfg.conv1_filters = 4;
    cfg.conv2_filters = 8;
    cfg.kernel = 3;
    cfg.dense_units = 16;
    cfg.num_classes = grid.num_classes();
    const auto model = init_model<float>(cfg, 3);
    const GrayImage glyph = make_default_glyph(20, 20);
    const ScanReport report = missing_codes_scan(model, glyph, grid, 5.0);
    CHECK_FALSE(report.passed);
    CHECK(static_cast<int>(report.classes_hit.size()) < grid.num_classes());
}

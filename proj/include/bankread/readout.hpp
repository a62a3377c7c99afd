// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_READOUT_HPP
#define BANKREAD_READOUT_HPP

#include <chrono>
#include <utility>

#include "bankread/angle_grid.hpp"
#include "bankread/net.hpp"
#include "bankread/warp.hpp"

namespace bankread {

// Both decodes of one prediction: the categorical argmax class and the
// interpolated (probability-weighted) angle.
struct Readout {
    int class_index = 0;
    double categorical_angle = 0.0;
    double interpolated_angle = 0.0;
    double elapsed_s = 0.0;
};

// Argmax class and its grid angle. Ties break toward the lowest index.
inline std::pair<int, double> argmax_readout(const PredictionVector& pred, const AngleGrid& grid) {
    if (pred.class_count() != grid.num_classes())
        throw ShapeMismatch("argmax_readout: vector has " + std::to_string(pred.class_count()) +
                            " entries but grid has " + std::to_string(grid.num_classes()));
    int best = 0;
    for (int c = 1; c < pred.class_count(); ++c)
        if (pred.probabilities[static_cast<std::size_t>(c)] >
            pred.probabilities[static_cast<std::size_t>(best)])
            best = c;
    return {best, angle_of_label(grid, best)};
}

// Expected angle under the predicted distribution: the grid angles dotted
// with the prediction weights, divided by their sum. For softmax outputs
// the sum is 1 and the division is only a guard for externally supplied
// vectors.
inline double interp_readout(const PredictionVector& pred, const AngleGrid& grid) {
    if (pred.class_count() != grid.num_classes())
        throw ShapeMismatch("interp_readout: vector has " + std::to_string(pred.class_count()) +
                            " entries but grid has " + std::to_string(grid.num_classes()));
    if (grid.placeholder)
        throw InvalidArgument("interp_readout: grid is categorical-only (placeholder angles); "
                              "interpolation is meaningless here");
    double dot = 0.0;
    double sum = 0.0;
    for (int c = 0; c < pred.class_count(); ++c) {
        const double p = pred.probabilities[static_cast<std::size_t>(c)];
        dot += grid.angles[static_cast<std::size_t>(c)] * p;
        sum += p;
    }
    if (sum <= 0.0)
        throw InvalidArgument("interp_readout: prediction vector sums to zero");
    return dot / sum;
}

// Full framewise decode: predict, then both readouts, with wall-clock time.
template <class T>
Readout read_bank_angle(const Model<T>& model, const GrayImage& image, const AngleGrid& grid) {
    const auto t0 = std::chrono::steady_clock::now();
    const PredictionVector pred = predict(model, image);
    const auto [cls, cat_angle] = argmax_readout(pred, grid);
    const double interp = interp_readout(pred, grid);
    const auto t1 = std::chrono::steady_clock::now();
    Readout r;
    r.class_index = cls;
    r.categorical_angle = cat_angle;
    r.interpolated_angle = interp;
    r.elapsed_s = std::chrono::duration<double>(t1 - t0).count();
    return r;
}

struct ScanReport {
    double fine_step = 0.0;
    std::vector<int> classes_hit;                       // distinct classes, ascending
    std::vector<std::pair<double, int>> violations;     // (angle, class) where order decreased
    bool passed = false;
};

// ADC-style scan: render the glyph from -max to +max in fine_step
// increments and record the argmax class at each angle. Passes when every
// class occurs and the class sequence never decreases as the angle grows.
template <class T>
ScanReport missing_codes_scan(const Model<T>& model, const GrayImage& glyph, const AngleGrid& grid,
                              double fine_step) {
    if (fine_step <= 0.0 || fine_step >= grid.step_deg)
        throw InvalidArgument("missing_codes_scan: fine_step must be in (0, grid step)");
    ScanReport report;
    report.fine_step = fine_step;
    std::vector<bool> hit(static_cast<std::size_t>(grid.num_classes()), false);
    int prev_class = -1;
    for (double angle = -grid.max_deg; angle <= grid.max_deg + 1e-9; angle += fine_step) {
        const GrayImage img = rotate_about_center(glyph, angle);
        const PredictionVector pred = predict(model, img);
        const int cls = argmax_readout(pred, grid).first;
        hit[static_cast<std::size_t>(cls)] = true;
        if (cls < prev_class) report.violations.emplace_back(angle, cls);
        prev_class = std::max(prev_class, cls);
    }
    for (int c = 0; c < grid.num_classes(); ++c)
        if (hit[static_cast<std::size_t>(c)]) report.classes_hit.push_back(c);
    report.passed = static_cast<int>(report.classes_hit.size()) == grid.num_classes() &&
                    report.violations.empty();
    return report;
}

} // namespace bankread

#endif // BANKREAD_READOUT_HPP

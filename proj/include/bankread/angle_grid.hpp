// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_ANGLE_GRID_HPP
#define BANKREAD_ANGLE_GRID_HPP

#include <cmath>
#include <string>
#include <vector>

#include "bankread/errors.hpp"

namespace bankread {

// Ordered bank-angle discretization: -max, -max+step, ..., +max.
// Placeholder grids (used when ingesting IDX/MNIST-shaped data) map labels
// 0..n-1 to the angles 0..n-1; they are categorical only and carry no
// geometric meaning, so interpolated readouts refuse them.
struct AngleGrid {
    double max_deg = 0.0;
    double step_deg = 0.0;
    std::vector<double> angles;
    bool placeholder = false;

    int num_classes() const { return static_cast<int>(angles.size()); }
};

inline AngleGrid make_angle_grid(double max_deg, double step_deg) {
    if (!(max_deg > 0.0) || !(step_deg > 0.0) || !std::isfinite(max_deg) ||
        !std::isfinite(step_deg))
        throw InvalidArgument("AngleGrid: max and step must be finite and > 0");
    const double ratio = 2.0 * max_deg / step_deg;
    const double rounded = std::round(ratio);
    if (std::fabs(ratio - rounded) > 1e-9)
        throw InvalidArgument("AngleGrid: step " + std::to_string(step_deg) +
                              " does not evenly divide 2*max " + std::to_string(2.0 * max_deg));
    const int count = static_cast<int>(rounded) + 1;
    AngleGrid grid;
    grid.max_deg = max_deg;
    grid.step_deg = step_deg;
    grid.angles.resize(count);
    for (int i = 0; i < count; ++i)
        grid.angles[i] = -max_deg + i * step_deg;
    grid.angles[count - 1] = max_deg; // exact endpoint regardless of rounding
    return grid;
}

inline AngleGrid make_placeholder_grid(int num_classes) {
    if (num_classes < 1)
        throw InvalidArgument("placeholder grid needs >= 1 class");
    AngleGrid grid;
    grid.placeholder = true;
    grid.max_deg = static_cast<double>(num_classes - 1);
    grid.step_deg = 1.0;
    grid.angles.resize(num_classes);
    for (int i = 0; i < num_classes; ++i)
        grid.angles[i] = static_cast<double>(i);
    return grid;
}

// Index of an on-grid angle: (angle + max)/step rounded to nearest.
// Angles farther than 1e-9 from a grid point are rejected.
inline int label_of_angle(const AngleGrid& grid, double angle_deg) {
    if (grid.angles.empty())
        throw InvalidArgument("label_of_angle: empty grid");
    const double pos = grid.placeholder ? angle_deg : (angle_deg + grid.max_deg) / grid.step_deg;
    const int idx = static_cast<int>(std::lround(pos));
    if (idx < 0 || idx >= grid.num_classes() ||
        std::fabs(grid.angles[static_cast<std::size_t>(idx)] - angle_deg) > 1e-9)
        throw InvalidArgument("label_of_angle: angle " + std::to_string(angle_deg) +
                              " is not on the grid");
    return idx;
}

inline double angle_of_label(const AngleGrid& grid, int label) {
    if (label < 0 || label >= grid.num_classes())
        throw InvalidArgument("angle_of_label: label " + std::to_string(label) +
                              " out of range [0," + std::to_string(grid.num_classes()) + ")");
    return grid.angles[static_cast<std::size_t>(label)];
}

} // namespace bankread

#endif // BANKREAD_ANGLE_GRID_HPP

// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_GLYPH_HPP
#define BANKREAD_GLYPH_HPP

#include <vector>

#include "bankread/angle_grid.hpp"
#include "bankread/image.hpp"
#include "bankread/warp.hpp"

namespace bankread {

namespace detail {

// 1-D profile: flat core of half-width `core`, then a cos^2 falloff over
// `shoulder`. Smooth everywhere, which keeps repeated bilinear resampling
// of the glyph well below the documented round-trip tolerance.
inline double glyph_profile(double d, double core, double shoulder) {
    const double a = std::fabs(d);
    if (a <= core) return 1.0;
    if (a >= core + shoulder) return 0.0;
    const double c = std::cos(0.5 * 3.14159265358979323846 * (a - core) / shoulder);
    return c * c;
}

} // namespace detail

// Deterministic procedural indicator glyph: a soft horizontal bar through
// the center (the wings) with a shorter lobe extending only upward from the
// center, plus a compact bright tip at each wing end. The lobe breaks
// symmetry across the horizontal axis, which is what makes rotations of
// the glyph mutually distinguishable; left/right mirror symmetry is
// preserved on purpose. Everything near the center uses wide smooth
// falloffs so repeated bilinear resampling stays within the documented
// round-trip tolerance; the tips sit outside that central disk and are
// kept sharp so neighboring rotations stay far apart in pixel space.
inline GrayImage make_default_glyph(int width, int height) {
    if (width < 16 || height < 16)
        throw InvalidArgument("make_default_glyph: dimensions must be >= 16, got " +
                              std::to_string(width) + "x" + std::to_string(height));
    GrayImage img(width, height);
    const double m = static_cast<double>(std::min(width, height));
    const double wing_core = 0.18 * m;      // flat half-length of the bar
    const double wing_shoulder = 0.20 * m;  // falloff along the bar
    const double thick_shoulder = 0.19 * m; // cross-section falloff (no core)
    const double stub_up = 0.15 * m;        // lobe center above image center
    const double tip_radius = 0.375 * m;    // tip centers, outside min(w,h)/4
    const double tip_half_width = 0.055 * m;
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy; // y grows downward; "up" is negative dy
            const double wing = detail::glyph_profile(dx, wing_core, wing_shoulder) *
                                detail::glyph_profile(dy, 0.0, thick_shoulder);
            const double stub = detail::glyph_profile(dx, 0.0, thick_shoulder) *
                                detail::glyph_profile(dy + stub_up, 0.0, thick_shoulder);
            const double tip_l =
                detail::glyph_profile(std::hypot(dx + tip_radius, dy), 0.0, tip_half_width);
            const double tip_r =
                detail::glyph_profile(std::hypot(dx - tip_radius, dy), 0.0, tip_half_width);
            // smooth union keeps every overlap crease-free
            const double v =
                1.0 - (1.0 - wing) * (1.0 - stub) * (1.0 - tip_l) * (1.0 - tip_r);
            img.at(x, y) = static_cast<float>(v);
        }
    }
    return img;
}

struct AliasPair {
    double angle_i = 0.0;
    double angle_j = 0.0;
    double rms = 0.0;
};

struct AliasReport {
    double min_distance = 0.0;
    std::vector<AliasPair> collisions;
    bool passed() const { return collisions.empty(); }
};

// Renders the glyph at every grid angle and flags pairs whose RMS pixel
// distance falls below min_distance. A passing (empty) report means no two
// grid angles alias to near-identical shapes, the precondition for using
// the glyph as a keyframe.
inline AliasReport check_rotational_aliasing(const GrayImage& glyph, const AngleGrid& grid,
                                             double min_distance) {
    AliasReport report;
    report.min_distance = min_distance;
    const int n = grid.num_classes();
    std::vector<GrayImage> renders;
    renders.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        renders.push_back(rotate_about_center(glyph, grid.angles[static_cast<std::size_t>(i)]));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = rms_distance(renders[static_cast<std::size_t>(i)],
                                          renders[static_cast<std::size_t>(j)]);
            if (d < min_distance)
                report.collisions.push_back({grid.angles[static_cast<std::size_t>(i)],
                                             grid.angles[static_cast<std::size_t>(j)], d});
        }
    }
    return report;
}

} // namespace bankread

#endif // BANKREAD_GLYPH_HPP

// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_WARP_HPP
#define BANKREAD_WARP_HPP

#include <cmath>

#include "bankread/image.hpp"

namespace bankread {

// 2x3 affine map (x,y) -> (a*x + b*y + tx, c*x + d*y + ty) over image
// coordinates: x grows rightward, y grows downward, pixel centers sit at
// integer coordinates.
struct Affine2D {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;
    double tx = 0.0, ty = 0.0;

    static Affine2D identity() { return {}; }

    static Affine2D translation(double dx, double dy) {
        return {1.0, 0.0, 0.0, 1.0, dx, dy};
    }

    static Affine2D scaling(double sx, double sy) {
        return {sx, 0.0, 0.0, sy, 0.0, 0.0};
    }

    // Rotation about the origin. With y pointing down, a positive angle
    // turns content clockwise on screen, i.e. toward a right bank.
    static Affine2D rotation_deg(double angle_deg) {
        const double rad = angle_deg * (3.14159265358979323846 / 180.0);
        const double co = std::cos(rad);
        const double si = std::sin(rad);
        return {co, -si, si, co, 0.0, 0.0};
    }

    double det() const { return a * d - b * c; }

    void apply(double x, double y, double& ox, double& oy) const {
        ox = a * x + b * y + tx;
        oy = c * x + d * y + ty;
    }

    // this followed by next: next * this.
    Affine2D then(const Affine2D& n) const {
        return {n.a * a + n.b * c,
                n.a * b + n.b * d,
                n.c * a + n.d * c,
                n.c * b + n.d * d,
                n.a * tx + n.b * ty + n.tx,
                n.c * tx + n.d * ty + n.ty};
    }

    Affine2D inverse() const {
        const double dt = det();
        if (std::fabs(dt) <= 1e-12)
            throw InvalidArgument("Affine2D::inverse: transform is singular (|det| <= 1e-12)");
        const double ia = d / dt;
        const double ib = -b / dt;
        const double ic = -c / dt;
        const double id = a / dt;
        return {ia, ib, ic, id, -(ia * tx + ib * ty), -(ic * tx + id * ty)};
    }
};

// Inverse-mapped warp: each output pixel center is pulled back through
// t^-1 and sampled bilinearly from the source. Taps outside the source
// rectangle contribute the background value 0.
inline GrayImage warp(const GrayImage& src, const Affine2D& t, int out_width, int out_height) {
    const Affine2D inv = t.inverse(); // throws on singular transforms
    GrayImage out(out_width, out_height);
    const int sw = src.width;
    const int sh = src.height;
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            double sx, sy;
            inv.apply(static_cast<double>(x), static_cast<double>(y), sx, sy);
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0;
            const double fy = sy - y0;
            auto tap = [&](int px, int py) -> double {
                if (px < 0 || px >= sw || py < 0 || py >= sh) return 0.0;
                return src.at(px, py);
            };
            const double v = (1.0 - fy) * ((1.0 - fx) * tap(x0, y0) + fx * tap(x0 + 1, y0)) +
                             fy * ((1.0 - fx) * tap(x0, y0 + 1) + fx * tap(x0 + 1, y0 + 1));
            out.at(x, y) = clamp_unit(static_cast<float>(v));
        }
    }
    return out;
}

// Rotation about the image center ((w-1)/2, (h-1)/2), same output
// dimensions. Positive angles bank right (clockwise on screen).
inline GrayImage rotate_about_center(const GrayImage& img, double angle_deg) {
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const Affine2D fwd = Affine2D::translation(-cx, -cy)
                             .then(Affine2D::rotation_deg(angle_deg))
                             .then(Affine2D::translation(cx, cy));
    return warp(img, fwd, img.width, img.height);
}

} // namespace bankread

#endif // BANKREAD_WARP_HPP

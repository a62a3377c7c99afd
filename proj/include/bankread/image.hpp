// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_IMAGE_HPP
#define BANKREAD_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bankread/errors.hpp"

namespace bankread {

// Normalized grayscale raster. Intensities live in [0,1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    GrayImage() = default;

    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h) {
        if (w < 1 || h < 1)
            throw InvalidArgument("GrayImage: dimensions must be >= 1, got " +
                                  std::to_string(w) + "x" + std::to_string(h));
        pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    std::size_t size() const { return pixels.size(); }

    float at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    float& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool same_shape(const GrayImage& o) const {
        return width == o.width && height == o.height;
    }
};

inline float clamp_unit(float v) {
    return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
}

// Largest per-pixel absolute difference. Images must share a shape.
inline float max_abs_diff(const GrayImage& a, const GrayImage& b) {
    if (!a.same_shape(b))
        throw ShapeMismatch("max_abs_diff: image shapes differ");
    float m = 0.0f;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        m = std::max(m, std::fabs(a.pixels[i] - b.pixels[i]));
    return m;
}

// Root-mean-square pixel distance.
inline double rms_distance(const GrayImage& a, const GrayImage& b) {
    if (!a.same_shape(b))
        throw ShapeMismatch("rms_distance: image shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.pixels.size()));
}

// Column x maps to column (width-1-x).
inline GrayImage mirror_horizontal(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = img.at(img.width - 1 - x, y);
    return out;
}

// Bilinear resampling with edge clamping. Pixel centers are aligned via the
// usual half-pixel offset, so resizing to the same dimensions is a no-op.
inline GrayImage resize(const GrayImage& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1)
        throw InvalidArgument("resize: target dimensions must be >= 1");
    GrayImage out(new_width, new_height);
    const double sx = static_cast<double>(img.width) / new_width;
    const double sy = static_cast<double>(img.height) / new_height;
    for (int y = 0; y < new_height; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        const double cy = std::min(std::max(src_y, 0.0), static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(std::floor(cy));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = cy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            const double cx = std::min(std::max(src_x, 0.0), static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(std::floor(cx));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = cx - x0;
            const double v = (1.0 - fy) * ((1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0)) +
                             fy * ((1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1));
            out.at(x, y) = clamp_unit(static_cast<float>(v));
        }
    }
    return out;
}

} // namespace bankread

#endif // BANKREAD_IMAGE_HPP

// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_DATASET_HPP
#define BANKREAD_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bankread/angle_grid.hpp"
#include "bankread/glyph.hpp"
#include "bankread/image.hpp"
#include "bankread/noise.hpp"
#include "bankread/prng.hpp"
#include "bankread/warp.hpp"

namespace bankread {

struct Sample {
    GrayImage image;
    int label = 0;
    double angle_deg = 0.0; // may be off-grid for evaluation sets
};

struct Provenance {
    std::string glyph_id;
    int copies = 1;
    std::optional<NoiseSpec> noise;
    std::uint64_t seed = 0;
};

// Labeled image collection, either the canon (one render per grid angle)
// or a replicated train/test set.
struct Dataset {
    AngleGrid grid;
    std::vector<Sample> samples;
    Provenance provenance;
    bool interpolatable = true; // false for IDX-ingested categorical data

    int count() const { return static_cast<int>(samples.size()); }
    int image_width() const { return samples.empty() ? 0 : samples.front().image.width; }
    int image_height() const { return samples.empty() ? 0 : samples.front().image.height; }
};

struct CanonOptions {
    // Gate threshold for the rotational-aliasing check.
    double alias_min_distance = 0.01;
    // Render only angles >= 0 and mirror them for the negative half. Valid
    // only for glyphs that are left/right symmetric at 0 degrees; verified
    // before use.
    bool mirror_negative = false;
    std::string glyph_id = "glyph";
};

// One sample per grid angle, in grid order: image = rotate_about_center
// (glyph, angle), label = label_of_angle(grid, angle). The glyph must pass
// the aliasing scan for the grid or the whole canon is rejected.
inline Dataset generate_canon(const GrayImage& glyph, const AngleGrid& grid,
                              const CanonOptions& opts = {}) {
    if (grid.placeholder)
        throw InvalidArgument("generate_canon: placeholder grids cannot be rendered");
    const AliasReport alias = check_rotational_aliasing(glyph, grid, opts.alias_min_distance);
    if (!alias.passed()) {
        const auto& worst = alias.collisions.front();
        throw InvalidArgument("generate_canon: glyph aliases under rotation (" +
                              std::to_string(alias.collisions.size()) + " colliding pairs, e.g. " +
                              std::to_string(worst.angle_i) + " vs " + std::to_string(worst.angle_j) +
                              " at RMS " + std::to_string(worst.rms) + " < " +
                              std::to_string(opts.alias_min_distance) + ")");
    }
    if (opts.mirror_negative && max_abs_diff(mirror_horizontal(glyph), glyph) > 1e-6f)
        throw InvalidArgument("generate_canon: mirror_negative requires a glyph that is "
                              "left/right symmetric at 0 degrees");

    Dataset canon;
    canon.grid = grid;
    canon.provenance.glyph_id = opts.glyph_id;
    canon.samples.reserve(grid.angles.size());
    for (int i = 0; i < grid.num_classes(); ++i) {
        const double angle = grid.angles[static_cast<std::size_t>(i)];
        Sample s;
        if (opts.mirror_negative && angle < 0.0)
            s.image = mirror_horizontal(rotate_about_center(glyph, -angle));
        else
            s.image = rotate_about_center(glyph, angle);
        s.label = i;
        s.angle_deg = angle;
        canon.samples.push_back(std::move(s));
    }
    return canon;
}

// Replicates the canon num_copies times. With a noise spec each copy is
// independently noised using a per-sample sub-seed derived from (seed,
// ordinal); without one the copies are pixel-identical. The result is
// shuffled by a Fisher-Yates permutation seeded from derive_seed(seed, 0),
// so the whole dataset is a pure function of its arguments.
inline Dataset replicate(const Dataset& canon, int num_copies,
                         const std::optional<NoiseSpec>& noise, std::uint64_t seed) {
    if (num_copies < 1)
        throw InvalidArgument("replicate: num_copies must be >= 1, got " +
                              std::to_string(num_copies));
    if (noise) validate_noise(*noise);

    Dataset out;
    out.grid = canon.grid;
    out.interpolatable = canon.interpolatable;
    out.provenance = canon.provenance;
    out.provenance.copies = num_copies;
    out.provenance.noise = noise;
    out.provenance.seed = seed;

    const std::size_t n = canon.samples.size();
    out.samples.reserve(n * static_cast<std::size_t>(num_copies));
    for (int c = 0; c < num_copies; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t ordinal = static_cast<std::uint64_t>(c) * n + i;
            Sample s = canon.samples[i];
            if (noise)
                s.image = add_noise(s.image, *noise, derive_seed(seed, 1 + ordinal));
            out.samples.push_back(std::move(s));
        }
    }
    seeded_shuffle(out.samples.begin(), out.samples.end(), derive_seed(seed, 0));
    return out;
}

} // namespace bankread

#endif // BANKREAD_DATASET_HPP

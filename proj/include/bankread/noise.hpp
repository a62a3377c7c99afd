// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_NOISE_HPP
#define BANKREAD_NOISE_HPP

#include <cstdint>
#include <string>

#include "bankread/image.hpp"
#include "bankread/prng.hpp"

namespace bankread {

enum class NoiseKind { gaussian, salt_pepper, speckle };

// For gaussian/speckle `level` is the standard deviation; for salt_pepper
// it is the per-pixel corruption probability.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double level = 0.0;
};

inline void validate_noise(const NoiseSpec& spec) {
    if (spec.kind == NoiseKind::salt_pepper) {
        if (spec.level < 0.0 || spec.level > 1.0)
            throw InvalidArgument("NoiseSpec: salt_pepper level must be in [0,1], got " +
                                  std::to_string(spec.level));
    } else if (spec.level < 0.0) {
        throw InvalidArgument("NoiseSpec: level must be >= 0, got " + std::to_string(spec.level));
    }
}

inline std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::salt_pepper: return "salt_pepper";
        case NoiseKind::speckle: return "speckle";
    }
    return "gaussian";
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "salt_pepper") return NoiseKind::salt_pepper;
    if (s == "speckle") return NoiseKind::speckle;
    throw InvalidArgument("unknown noise kind '" + s + "' (gaussian|salt_pepper|speckle)");
}

// "kind:level", e.g. "gaussian:0.1".
inline NoiseSpec parse_noise_spec(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw InvalidArgument("noise spec must be kind:level, got '" + s + "'");
    NoiseSpec spec;
    spec.kind = noise_kind_from_string(s.substr(0, colon));
    try {
        spec.level = std::stod(s.substr(colon + 1));
    } catch (const std::exception&) {
        throw InvalidArgument("noise level not a number in '" + s + "'");
    }
    validate_noise(spec);
    return spec;
}

// Applies noise deterministically: same (img, spec, seed) gives a
// bit-identical result. Pixels are visited in row-major order; gaussian and
// speckle take one gaussian draw per pixel, salt_pepper takes one uniform
// draw per pixel plus one more for the 0/1 choice when the pixel is hit.
inline GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec, std::uint64_t seed) {
    validate_noise(spec);
    GrayImage out = img;
    SplitMix64 rng(seed);
    switch (spec.kind) {
        case NoiseKind::gaussian:
            for (auto& p : out.pixels)
                p = clamp_unit(p + static_cast<float>(spec.level * rng.next_gaussian()));
            break;
        case NoiseKind::salt_pepper:
            for (auto& p : out.pixels) {
                if (rng.next_unit() < spec.level)
                    p = rng.next_unit() < 0.5 ? 0.0f : 1.0f;
            }
            break;
        case NoiseKind::speckle:
            for (auto& p : out.pixels)
                p = clamp_unit(p * (1.0f + static_cast<float>(spec.level * rng.next_gaussian())));
            break;
    }
    return out;
}

} // namespace bankread

#endif // BANKREAD_NOISE_HPP

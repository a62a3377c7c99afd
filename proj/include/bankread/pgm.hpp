// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_PGM_HPP
#define BANKREAD_PGM_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "bankread/image.hpp"

namespace bankread {

namespace detail {

inline bool pgm_is_space(char ch) {
    return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '\v' || ch == '\f';
}

// Skips whitespace and '#' comments; `pos` always tracks the byte offset so
// errors can name where parsing stopped.
inline void pgm_skip_space(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        if (pgm_is_space(buf[pos])) {
            ++pos;
        } else if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
}

inline unsigned pgm_read_uint(const std::string& buf, std::size_t& pos, const char* field) {
    pgm_skip_space(buf, pos);
    if (pos >= buf.size() || buf[pos] < '0' || buf[pos] > '9')
        throw FormatError(std::string("PGM: expected ") + field + " at byte offset " +
                          std::to_string(pos));
    unsigned long v = 0;
    while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
        v = v * 10 + static_cast<unsigned long>(buf[pos] - '0');
        if (v > 1000000000UL)
            throw FormatError(std::string("PGM: ") + field + " out of range at byte offset " +
                              std::to_string(pos));
        ++pos;
    }
    return static_cast<unsigned>(v);
}

} // namespace detail

// Reads a binary 8-bit PGM ("P5", maxval 255). Intensities map to byte/255.
inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("PGM: cannot open '" + path + "' for reading");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') {
        const std::string magic = buf.substr(0, std::min<std::size_t>(2, buf.size()));
        throw FormatError("PGM: unsupported format magic '" + magic +
                          "' at byte offset 0 (only binary P5 is supported)");
    }
    pos = 2;
    const unsigned width = detail::pgm_read_uint(buf, pos, "width");
    const unsigned height = detail::pgm_read_uint(buf, pos, "height");
    const std::size_t maxval_pos = pos;
    const unsigned maxval = detail::pgm_read_uint(buf, pos, "maxval");
    if (maxval != 255)
        throw FormatError("PGM: maxval must be 255, got " + std::to_string(maxval) +
                          " at byte offset " + std::to_string(maxval_pos));
    if (pos >= buf.size() || !detail::pgm_is_space(buf[pos]))
        throw FormatError("PGM: expected single whitespace after maxval at byte offset " +
                          std::to_string(pos));
    ++pos; // exactly one whitespace byte separates header and raster
    if (width < 1 || height < 1)
        throw FormatError("PGM: dimensions must be >= 1, got " + std::to_string(width) + "x" +
                          std::to_string(height));

    const std::size_t need = static_cast<std::size_t>(width) * height;
    if (buf.size() - pos < need)
        throw TruncationError("PGM: pixel data truncated at byte offset " +
                              std::to_string(buf.size()) + " (need " +
                              std::to_string(pos + need) + " bytes)");

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < need; ++i)
        img.pixels[i] = static_cast<float>(static_cast<unsigned char>(buf[pos + i])) / 255.0f;
    return img;
}

// Writes binary P5, maxval 255, byte = round(intensity*255). Output is
// bit-exact for identical input images.
inline void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("PGM: cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> bytes(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        long v = std::lround(static_cast<double>(img.pixels[i]) * 255.0);
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        bytes[i] = static_cast<unsigned char>(v);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("PGM: write failed for '" + path + "'");
}

} // namespace bankread

#endif // BANKREAD_PGM_HPP

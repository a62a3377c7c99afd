// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_DATASET_IO_HPP
#define BANKREAD_DATASET_IO_HPP

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bankread/binio.hpp"
#include "bankread/dataset.hpp"
#include "bankread/pgm.hpp"

namespace bankread {

// Packed dataset container, magic "GDS1" (byte layout in the README):
//   "GDS1" | u8 grid_kind | f64 max_deg | f64 step_deg | u32 num_classes
//   | u64 sample_count | u32 width | u32 height
//   then per sample: u16 label | f32 angle_deg | width*height pixel bytes.
// All multi-byte fields little-endian; pixels quantized to 8 bits.

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("GDS1: cannot open '" + path + "' for writing");

    const int w = ds.image_width();
    const int h = ds.image_height();
    for (const auto& s : ds.samples)
        if (s.image.width != w || s.image.height != h)
            throw ShapeMismatch("GDS1: all sample images must share dimensions");

    out.write("GDS1", 4);
    detail::write_le<std::uint8_t>(out, ds.grid.placeholder ? 1 : 0);
    detail::write_f64_le(out, ds.grid.max_deg);
    detail::write_f64_le(out, ds.grid.step_deg);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.grid.num_classes()));
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.samples.size()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(h));

    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    for (const auto& s : ds.samples) {
        detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.label));
        detail::write_f32_le(out, static_cast<float>(s.angle_deg));
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            long v = std::lround(static_cast<double>(s.image.pixels[i]) * 255.0);
            bytes[i] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
        detail::write_bytes(out, bytes.data(), bytes.size());
    }
    if (!out)
        throw IoError("GDS1: write failed for '" + path + "'");
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("GDS1: cannot open '" + path + "' for reading");

    char magic[4];
    detail::read_bytes(in, magic, 4, "GDS1 magic");
    if (std::string(magic, 4) != "GDS1")
        throw FormatError("GDS1: bad magic '" + std::string(magic, 4) + "' at byte offset 0");

    const auto grid_kind = detail::read_le<std::uint8_t>(in, "GDS1 grid kind");
    const double max_deg = detail::read_f64_le(in, "GDS1 max angle");
    const double step_deg = detail::read_f64_le(in, "GDS1 step");
    const auto num_classes = detail::read_le<std::uint32_t>(in, "GDS1 class count");
    const auto sample_count = detail::read_le<std::uint64_t>(in, "GDS1 sample count");
    const auto width = detail::read_le<std::uint32_t>(in, "GDS1 width");
    const auto height = detail::read_le<std::uint32_t>(in, "GDS1 height");

    if (width < 1 || height < 1)
        throw FormatError("GDS1: image dimensions must be >= 1, got " + std::to_string(width) +
                          "x" + std::to_string(height));

    Dataset ds;
    if (grid_kind == 1) {
        ds.grid = make_placeholder_grid(static_cast<int>(num_classes));
        ds.interpolatable = false;
    } else if (grid_kind == 0) {
        ds.grid = make_angle_grid(max_deg, step_deg);
        if (ds.grid.num_classes() != static_cast<int>(num_classes))
            throw FormatError("GDS1: grid dimension mismatch, header says " +
                              std::to_string(num_classes) + " classes but (max,step) = (" +
                              std::to_string(max_deg) + "," + std::to_string(step_deg) +
                              ") yields " + std::to_string(ds.grid.num_classes()));
    } else {
        throw FormatError("GDS1: unknown grid kind " + std::to_string(grid_kind));
    }

    // reserve is capped: a corrupt header cannot force a huge allocation
    ds.samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(sample_count, 1 << 20)));
    std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
    for (std::uint64_t k = 0; k < sample_count; ++k) {
        const std::string where = "GDS1 sample " + std::to_string(k);
        Sample s;
        s.label = detail::read_le<std::uint16_t>(in, where + " label");
        if (s.label >= static_cast<int>(num_classes))
            throw FormatError("GDS1: sample " + std::to_string(k) + " label " +
                              std::to_string(s.label) + " out of range");
        s.angle_deg = detail::read_f32_le(in, where + " angle");
        detail::read_bytes(in, bytes.data(), bytes.size(), where + " pixels");
        s.image = GrayImage(static_cast<int>(width), static_cast<int>(height));
        for (std::size_t i = 0; i < bytes.size(); ++i)
            s.image.pixels[i] = static_cast<float>(bytes[i]) / 255.0f;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

// Writes every sample as sample_NNNNNN.pgm plus a labels.csv with columns
// filename,label,angle.
inline void export_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("export: cannot create directory '" + dir + "': " + ec.message());

    std::ofstream csv(fs::path(dir) / "labels.csv", std::ios::trunc);
    if (!csv)
        throw IoError("export: cannot write labels.csv in '" + dir + "'");
    csv << "filename,label,angle\n";
    char name[32];
    for (std::size_t k = 0; k < ds.samples.size(); ++k) {
        std::snprintf(name, sizeof(name), "sample_%06zu.pgm", k);
        save_pgm(ds.samples[k].image, (fs::path(dir) / name).string());
        csv << name << "," << ds.samples[k].label << "," << ds.samples[k].angle_deg << "\n";
    }
}

} // namespace bankread

#endif // BANKREAD_DATASET_IO_HPP

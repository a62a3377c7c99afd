// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_IDX_HPP
#define BANKREAD_IDX_HPP

#include <fstream>

#include "bankread/binio.hpp"
#include "bankread/dataset.hpp"

namespace bankread {

// Reads an MNIST-style IDX pair (big-endian headers, image magic 2051,
// label magic 2049) so the training pipeline can run on MNIST-shaped data
// side by side with synthesized bank sets. Labels 0-9 map to placeholder
// angles 0-9; the resulting dataset is categorical only and is flagged
// non-interpolatable.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs)
        throw IoError("IDX: cannot open '" + images_path + "' for reading");
    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs)
        throw IoError("IDX: cannot open '" + labels_path + "' for reading");

    const std::uint32_t img_magic = detail::read_u32_be(imgs, "IDX image magic");
    if (img_magic != 0x00000803u)
        throw FormatError("IDX: image file magic must be 0x00000803, got " +
                          std::to_string(img_magic) + " at byte offset 0");
    const std::uint32_t lab_magic = detail::read_u32_be(labs, "IDX label magic");
    if (lab_magic != 0x00000801u)
        throw FormatError("IDX: label file magic must be 0x00000801, got " +
                          std::to_string(lab_magic) + " at byte offset 0");

    const std::uint32_t n_images = detail::read_u32_be(imgs, "IDX image count");
    const std::uint32_t rows = detail::read_u32_be(imgs, "IDX rows");
    const std::uint32_t cols = detail::read_u32_be(imgs, "IDX cols");
    const std::uint32_t n_labels = detail::read_u32_be(labs, "IDX label count");

    if (n_images != n_labels)
        throw FormatError("IDX: image count " + std::to_string(n_images) +
                          " does not match label count " + std::to_string(n_labels));
    if (rows < 1 || cols < 1)
        throw FormatError("IDX: image dimensions must be >= 1, got " + std::to_string(cols) +
                          "x" + std::to_string(rows));

    Dataset ds;
    ds.grid = make_placeholder_grid(10);
    ds.interpolatable = false;
    ds.provenance.glyph_id = "idx:" + images_path;
    ds.samples.reserve(n_images);

    std::vector<unsigned char> pix(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t k = 0; k < n_images; ++k) {
        const std::string where = "IDX sample " + std::to_string(k);
        detail::read_bytes(imgs, pix.data(), pix.size(), where + " pixels");
        unsigned char label;
        detail::read_bytes(labs, &label, 1, where + " label");
        if (label > 9)
            throw FormatError("IDX: sample " + std::to_string(k) + " has invalid label " +
                              std::to_string(static_cast<int>(label)) + " (expected 0-9)");
        Sample s;
        s.label = label;
        s.angle_deg = static_cast<double>(label); // placeholder angle
        s.image = GrayImage(static_cast<int>(cols), static_cast<int>(rows));
        for (std::size_t i = 0; i < pix.size(); ++i)
            s.image.pixels[i] = static_cast<float>(pix[i]) / 255.0f;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace bankread

#endif // BANKREAD_IDX_HPP

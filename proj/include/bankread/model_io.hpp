// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_MODEL_IO_HPP
#define BANKREAD_MODEL_IO_HPP

#include <fstream>

#include "bankread/binio.hpp"
#include "bankread/net.hpp"

namespace bankread {

// Model container, magic "GNM1" (byte layout in the README):
//   "GNM1" | u32 version=1
//   | config: u32 input_h, input_w, conv1, conv2, kernel, pool, dense,
//     classes | u8 optimizer | f64 learning_rate | u32 batch, epochs
//   | u8 trained
//   | 8 tensors (conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w,
//     fc2_b), each: u32 ndim | u64 dims... | f32 values
// All multi-byte fields little-endian. Weights are stored as 32-bit IEEE
// floats, so a float model round-trips losslessly and reloaded models give
// bit-identical predictions.

namespace detail {

inline const char* model_tensor_name(std::size_t i) {
    static const char* names[] = {"conv1_w", "conv1_b", "conv2_w", "conv2_b",
                                  "fc1_w",   "fc1_b",   "fc2_w",   "fc2_b"};
    return names[i];
}

} // namespace detail

template <class T>
void save_model(const Model<T>& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("GNM1: cannot open '" + path + "' for writing");
    const ModelConfig& c = model.config;
    out.write("GNM1", 4);
    detail::write_le<std::uint32_t>(out, 1); // version
    for (int field : {c.input_h, c.input_w, c.conv1_filters, c.conv2_filters, c.kernel, c.pool,
                      c.dense_units, c.num_classes})
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(field));
    detail::write_le<std::uint8_t>(out, c.optimizer == OptimizerKind::adam ? 0 : 1);
    detail::write_f64_le(out, c.learning_rate);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.batch_size));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.epochs));
    detail::write_le<std::uint8_t>(out, model.trained ? 1 : 0);

    for (const auto* t : model.parameters()) {
        detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t->shape.size()));
        for (auto d : t->shape) detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
        for (const auto v : t->v) detail::write_f32_le(out, static_cast<float>(v));
    }
    if (!out)
        throw IoError("GNM1: write failed for '" + path + "'");
}

inline Model<float> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("GNM1: cannot open '" + path + "' for reading");
    char magic[4];
    detail::read_bytes(in, magic, 4, "GNM1 magic");
    if (std::string(magic, 4) != "GNM1")
        throw FormatError("GNM1: bad magic '" + std::string(magic, 4) + "' at byte offset 0");
    const auto version = detail::read_le<std::uint32_t>(in, "GNM1 version");
    if (version != 1)
        throw FormatError("GNM1: unsupported version " + std::to_string(version));

    ModelConfig c;
    c.input_h = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 input_h"));
    c.input_w = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 input_w"));
    c.conv1_filters = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 conv1"));
    c.conv2_filters = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 conv2"));
    c.kernel = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 kernel"));
    c.pool = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 pool"));
    c.dense_units = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 dense"));
    c.num_classes = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 classes"));
    c.optimizer = detail::read_le<std::uint8_t>(in, "GNM1 optimizer") == 0 ? OptimizerKind::adam
                                                                           : OptimizerKind::sgd;
    c.learning_rate = detail::read_f64_le(in, "GNM1 learning rate");
    c.batch_size = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 batch"));
    c.epochs = static_cast<int>(detail::read_le<std::uint32_t>(in, "GNM1 epochs"));
    const bool trained = detail::read_le<std::uint8_t>(in, "GNM1 trained flag") != 0;

    // Template with the right shapes, then overwrite every tensor.
    Model<float> model = init_model<float>(c, 0);
    model.trained = trained;
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string name = detail::model_tensor_name(i);
        const auto ndim = detail::read_le<std::uint32_t>(in, "GNM1 tensor " + name + " rank");
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape)
            d = static_cast<std::size_t>(
                detail::read_le<std::uint64_t>(in, "GNM1 tensor " + name + " dims"));
        if (shape != params[i]->shape)
            throw FormatError("GNM1: tensor " + name + " shape inconsistent with config");
        for (auto& v : params[i]->v)
            v = detail::read_f32_le(in, "GNM1 tensor " + name + " values");
    }
    return model;
}

} // namespace bankread

#endif // BANKREAD_MODEL_IO_HPP

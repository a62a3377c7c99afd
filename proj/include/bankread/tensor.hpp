// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_TENSOR_HPP
#define BANKREAD_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "bankread/errors.hpp"

namespace bankread {

// Dense row-major value array. The scalar type is a template parameter so
// the same layer code runs in float for training/inference and in double
// for finite-difference gradient verification.
template <class T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> v;

    Tensor() = default;

    explicit Tensor(std::initializer_list<std::size_t> dims) { reshape(dims); }

    void reshape(std::initializer_list<std::size_t> dims) {
        shape.assign(dims);
        v.assign(numel_of(shape), T(0));
    }

    static std::size_t numel_of(const std::vector<std::size_t>& dims) {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }

    std::size_t numel() const { return v.size(); }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
};

// Non-finite values poison any sum they enter, so a single accumulation
// pass detects NaN/Inf anywhere in the buffer.
template <class T>
bool all_finite(const std::vector<T>& v) {
    T acc = T(0);
    for (const T x : v) acc += x;
    return std::isfinite(static_cast<double>(acc));
}

template <class T>
bool all_finite(const Tensor<T>& t) {
    return all_finite(t.v);
}

} // namespace bankread

#endif // BANKREAD_TENSOR_HPP

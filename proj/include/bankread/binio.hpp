// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_BINIO_HPP
#define BANKREAD_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "bankread/errors.hpp"

namespace bankread::detail {

// Little-endian scalar I/O over iostreams. Readers throw TruncationError
// with the failing byte offset baked into `what`.

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
    write_bytes(out, buf, sizeof(T));
}

inline void write_f32_le(std::ostream& out, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    write_le<std::uint32_t>(out, bits);
}

inline void write_f64_le(std::ostream& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    write_le<std::uint64_t>(out, bits);
}

inline void read_bytes(std::istream& in, void* p, std::size_t n, const std::string& what) {
    const auto before = in.tellg();
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw TruncationError("truncated while reading " + what + " at byte offset " +
                              std::to_string(static_cast<long long>(before)));
}

template <class T>
T read_le(std::istream& in, const std::string& what) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    read_bytes(in, buf, sizeof(T), what);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        u |= static_cast<U>(buf[i]) << (8 * i);
    return static_cast<T>(u);
}

inline float read_f32_le(std::istream& in, const std::string& what) {
    const auto bits = read_le<std::uint32_t>(in, what);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

inline double read_f64_le(std::istream& in, const std::string& what) {
    const auto bits = read_le<std::uint64_t>(in, what);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

// Big-endian u32, as used by the IDX container.
inline std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
    unsigned char buf[4];
    read_bytes(in, buf, 4, what);
    return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

} // namespace bankread::detail

#endif // BANKREAD_BINIO_HPP

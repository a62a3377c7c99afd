// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_ERRORS_HPP
#define BANKREAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bankread {

// Base of every error thrown by the library. code() maps one-to-one onto
// the CLI exit codes documented in the README.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int code() const { return 1; }
};

// File missing, unreadable or unwritable.
class IoError : public Error {
public:
    using Error::Error;
    int code() const override { return 3; }
};

// Bad magic, malformed header, inconsistent field. Messages carry the byte
// offset where parsing failed whenever one is known.
class FormatError : public Error {
public:
    using Error::Error;
    int code() const override { return 4; }
};

// File ends before the payload does.
class TruncationError : public FormatError {
public:
    using FormatError::FormatError;
};

// Caller violated a precondition (bad dimensions, off-grid angle, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
    int code() const override { return 5; }
};

// Tensor/image dimensions incompatible with what an operation expects.
class ShapeMismatch : public Error {
public:
    using Error::Error;
    int code() const override { return 6; }
};

// Training produced a non-finite loss or parameter.
class DivergenceError : public Error {
public:
    using Error::Error;
    int code() const override { return 7; }
};

// Binary search target not met even at the upper bound.
class UnreachableTarget : public Error {
public:
    using Error::Error;
    int code() const override { return 8; }
};

} // namespace bankread

#endif // BANKREAD_ERRORS_HPP

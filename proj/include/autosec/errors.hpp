// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace autosec {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline std::string located(const std::string& file, int line, const std::string& message) {
    std::string out;
    if (!file.empty()) {
        out += file;
        out += ':';
    }
    if (line > 0) {
        out += std::to_string(line);
        out += ": ";
    } else if (!file.empty()) {
        out += ": ";
    }
    out += message;
    return out;
}
} // namespace detail

/// Malformed input text. Carries file and line when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(message) {}
    ParseError(std::string file, int line, const std::string& message)
        : Error(detail::located(file, line, message)), file_(std::move(file)), line_(line) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_ = 0;
};

/// Structurally well-formed input that violates a model invariant
/// (dangling reference, duplicate id, missing entry interface, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A document is missing a mandatory structural field.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// File could not be opened or read.
class IoError : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class ZeroPeriod : public Error {
public:
    using Error::Error;
};

class EmptySeries : public Error {
public:
    using Error::Error;
};

class EmptyObservation : public Error {
public:
    using Error::Error;
};

class InvalidStrength : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class TargetUnknown : public Error {
public:
    using Error::Error;
};

class EmptyVariantSet : public Error {
public:
    using Error::Error;
};

/// The attack target is unreachable from every entry interface.
class NoPath : public Error {
public:
    using Error::Error;
};

class UnknownComponent : public Error {
public:
    using Error::Error;
};

/// No mitigation subset satisfies the MSV constraint.
class Infeasible : public Error {
public:
    using Error::Error;
};

class CatalogTooLarge : public Error {
public:
    using Error::Error;
};

/// An execution adapter failed while running an attack vector.
class AdapterError : public Error {
public:
    using Error::Error;
};

} // namespace autosec

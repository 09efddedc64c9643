#pragma once

#include <stdexcept>
#include <string>

namespace corecd {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape or size mismatch between two objects that must agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// The request exceeds what an operation supports (e.g. exhaustive
/// enumeration above its practical bound).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// An object violates one of its invariants (cyclic ground truth,
/// duplicate dataset entries, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file could not be parsed; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// File content is well-formed but inconsistent with its own header
/// or with the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A generator could not produce the requested number of unique items
/// within its retry budget; carries how many were found.
class ExhaustionError : public Error {
public:
    ExhaustionError(const std::string& msg, long found)
        : Error(msg), found_(found) {}
    long found() const { return found_; }

private:
    long found_;
};

/// Invalid configuration (bad field values, mismatched dataset, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An index is out of its valid range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// A caller broke an API contract (e.g. submitted a masked action).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during training; carries the offending layer.
class TrainingError : public Error {
public:
    TrainingError(const std::string& msg, int layer)
        : Error(msg + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
    explicit TrainingError(const std::string& msg) : Error(msg), layer_(-1) {}
    int layer() const { return layer_; }

private:
    int layer_;
};

/// Filesystem failure (open/read/write).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace corecd

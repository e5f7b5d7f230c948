#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfhar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A box with non-positive extent or non-finite coordinates.
class InvalidBoxError : public Error {
public:
    using Error::Error;
};

/// A detection that collapses to nothing once clamped to the source frame.
class InvalidDetectionError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation precondition (wrong canvas size, bad argument).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed text or JSON input. `where()` carries the line number or JSON path.
class ParseError : public Error {
public:
    ParseError(std::string where, const std::string& message)
        : Error(where + ": " + message), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class DetectionBackendError : public Error {
public:
    using Error::Error;
};

class ClassifierBackendError : public Error {
public:
    using Error::Error;
};

/// A model file that is missing, unreadable or rejects the expected input.
class ModelLoadError : public Error {
public:
    using Error::Error;
};

/// A network output tensor does not have the layout the adapter decodes.
class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

/// A frame index that does not advance past the last one seen for a stream.
class OutOfOrderFrameError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

/// One problem found while validating a configuration, keyed by its JSON path.
struct ConfigIssue {
    std::string path;
    std::string message;

    bool operator==(const ConfigIssue&) const = default;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);

    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

}  // namespace mfhar

#pragma once

#include <stdexcept>
#include <string>

namespace mdf {

/// Input could not be decoded at all (bad JSON, bad UTF-8, truncated file).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Input decoded but violates a documented invariant (duplicate id, cycle, ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or network failure, annotated with the path or URL involved.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Persisted artifact declares a format this build does not understand.
struct VersionError : std::runtime_error {
    explicit VersionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdf

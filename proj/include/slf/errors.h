#pragma once

#include <stdexcept>
#include <string>

namespace slf {

// Malformed or inconsistent input data (files, datasets, configs).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A path that should exist does not (or cannot be opened).
struct FileNotFoundError : DataError {
    explicit FileNotFoundError(const std::string& what) : DataError(what) {}
};

// A file opened fine but its contents do not parse.
struct ParseError : DataError {
    explicit ParseError(const std::string& what) : DataError(what) {}
};

// Two inputs that must agree do not (sizes, ids, overlapping splits).
struct MismatchError : DataError {
    explicit MismatchError(const std::string& what) : DataError(what) {}
};

// A mesh file parses but violates what the pipeline needs (e.g. quads).
struct MeshFormatError : DataError {
    explicit MeshFormatError(const std::string& what) : DataError(what) {}
};

// Optimization or numerical routine failed to produce a finite result.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Bad command line or programmatic usage.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace slf

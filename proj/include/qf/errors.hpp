#pragma once

#include <stdexcept>
#include <string>

namespace qf {

// Thrown for invalid arguments to library operations (bad counts, ranges).
struct ArgError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when input data does not match the declared schema
// (unknown columns, wrong kinds, re-encoding an encoded feature).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for malformed file content; carries a 1-based row number when known.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg, long row = -1)
        : std::runtime_error(row >= 0 ? msg + " (row " + std::to_string(row) + ")" : msg),
          row_index(row) {}
    long row_index;
};

// Thrown when a file cannot be opened or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qf

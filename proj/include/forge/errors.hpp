#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Malformed input (bad JSON/CSV, wrong row counts, unknown enum names).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid data (dangling parent, non-square matrix, bad ids).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures; message always carries the path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace forge

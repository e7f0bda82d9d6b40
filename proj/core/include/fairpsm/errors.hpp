#pragma once

#include <stdexcept>
#include <string>

namespace fairpsm {

// Bad user input: unknown flags, malformed schema files, unreadable paths.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A schema that does not match the CSV it is applied to.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid data that cannot support the requested operation
// (single-class labels, an empty protected group, too few rows, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or value violations on numeric inputs (width mismatch, non-finite).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fairpsm

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdsde {

// Base of every error thrown by the core. The C API maps each subclass to a
// status code; the message is always a single line.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Precondition or argument-range failure (eps out of range, unordered
// coupling, empty input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    // position is 1-based (column of the offending character)
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at offset " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Non-finite arithmetic: division by zero, overflow, simulation blow-up.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Scenario validation failure; key() names the offending entry, e.g. "grid.dt".
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& reason)
        : Error(key + ": " + reason), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace pdsde

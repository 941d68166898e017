#pragma once

#include <stdexcept>
#include <string>

namespace spikebayes {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible dimensions, scalar fields, or amplitude sizes.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A law or combination of laws that an operation does not support.
class UnsupportedLaw : public Error {
public:
    using Error::Error;
};

/// Invalid parameters (non-positive variance, bad bounds, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Experiment configuration could not be validated. `key()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spikebayes

#pragma once

#include <stdexcept>
#include <string>

namespace ahi {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration: bad flags, bad profile, unreachable class mix.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or contract-violating input data: parse failures, schema
// violations, duplicate records, unlabeled assets.
class DataError : public Error {
public:
    using Error::Error;
};

// Numerical failure: diverging loss, non-convergent eigensolver,
// zero-variance feature matrix.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace ahi

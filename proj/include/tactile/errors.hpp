#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tactile {

// Base for every error raised by the library. Messages are prefixed with
// the module that raised them, e.g. "sensor_stream: tick 7: ...".
class Error : public std::runtime_error {
public:
    Error(std::string_view module, const std::string& what)
        : std::runtime_error(std::string(module) + ": " + what)
    {}
};

// Malformed input file or record.
class FormatError : public Error {
public:
    using Error::Error;
};

// Argument outside an operation's precondition.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Inconsistent dataset or training/evaluation configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Incompatible dimensions between a model and the data given to it.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

// Non-finite or otherwise unusable numerical results.
class NumericError : public Error {
public:
    using Error::Error;
};

// Sensor readings that make a feature undefined (e.g. core temperature
// below its floor).
class SensorFault : public Error {
public:
    using Error::Error;
};

}  // namespace tactile

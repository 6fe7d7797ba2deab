#pragma once

#include <stdexcept>
#include <string>

namespace gwkae {

// Every failure raised by the library derives from Error. The CLI maps the
// category to its exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class PersistenceError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

// Numeric failure during optimisation (non-finite gradient or loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

// No damaged-path information (DI_max == 0) where a weight is requested.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

}  // namespace gwkae

#pragma once

#include <stdexcept>
#include <string>

namespace handtrack {

// Exit-code classes used by the CLI: SchemaError/ConfigError -> 2,
// DataError -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace handtrack

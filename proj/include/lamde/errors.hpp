#pragma once

#include <stdexcept>
#include <string>

namespace lamde {

// Invalid or inconsistent input: CSV contents, value ranges, model files,
// bad operation preconditions. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown while fitting or evaluating (non-finite values,
// failed solves). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lamde

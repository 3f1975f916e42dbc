#pragma once

#include <stdexcept>
#include <string>

namespace wvic {

/// Malformed or inconsistent input data (labels, dimensions, files).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numerical input or a solver failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wvic

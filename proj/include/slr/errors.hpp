#pragma once

#include <stdexcept>
#include <string>

namespace slr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes, grids or channel counts that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

// Non-finite values, non-Hermitian Gram matrices and similar breakdowns.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace slr

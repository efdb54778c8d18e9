#pragma once

#include <stdexcept>
#include <string>

namespace crescal {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input and configuration problems. The CLI maps these to exit code 2.
struct ParseError : Error {
    using Error::Error;
};
struct EmptyInputError : ParseError {
    using ParseError::ParseError;
};
struct ShapeError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct SizeError : Error {
    using Error::Error;
};
struct SplitError : Error {
    using Error::Error;
};
struct MetricError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// Numerical failures. The CLI maps these to exit code 3.
struct NumericalError : Error {
    using Error::Error;
};
struct SingularityError : NumericalError {
    using NumericalError::NumericalError;
};
struct DivergenceError : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace crescal

#pragma once

#include <stdexcept>
#include <string>

namespace cafd {

// Base of every error raised by the library. The CLI maps `NumericalError`
// to exit status 2 and everything else to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Wrong magic bytes, unparsable text, unsupported layout.
class FormatError : public Error {
public:
    using Error::Error;
};

// Header-declared shape disagrees with the payload length.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Non-finite values, labels out of range, probabilities off the simplex.
class DataError : public Error {
public:
    using Error::Error;
};

// Shape disagreement between paired inputs.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Precondition violations on arguments (ranges, counts, empty inputs).
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Eigensolver non-convergence, matrices that are materially not PSD,
// singular systems.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace cafd

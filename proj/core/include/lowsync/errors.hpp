#pragma once

#include <stdexcept>
#include <string>

namespace lowsync {

/// Raised when a kernel produces or consumes a NaN/Inf entry.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised on operand shape mismatches.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input files or unsupported formats.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace lowsync

#pragma once

#include <stdexcept>
#include <string>

namespace biip {

// Error taxonomy mirrored by the CLI exit codes: configuration / input
// validation problems exit with 2, numerical failures with 3, filesystem
// problems with 4.

// Invalid configuration, malformed input, or a request the library refuses
// (bad dimensions, boundary sets that do not decompose into cycles, ...).
struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: divergence, non-finite values, step-size underflow.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A solver walked out of its budget or blew up.
struct DivergenceError : NumericError {
  explicit DivergenceError(const std::string& what) : NumericError(what) {}
};

// Filesystem / serialization failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace biip

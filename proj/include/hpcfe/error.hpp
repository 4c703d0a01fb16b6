#pragma once

#include <stdexcept>
#include <string>

namespace hpcfe {

// Bad input: wrong shapes, out-of-range values, malformed files.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation that was set up correctly but could not be completed
// (singular matrices, failed factorizations, no resonance peak, ...).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hpcfe

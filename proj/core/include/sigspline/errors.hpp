#pragma once

#include <stdexcept>
#include <string>

namespace sigspline {

/// Malformed or inconsistent input data: wrong shapes, short series, bad files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: divergence, singular covariance, non-PSD matrix.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigspline

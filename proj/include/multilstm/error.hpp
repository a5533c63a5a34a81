#pragma once

#include <stdexcept>
#include <string>

namespace multilstm {

// Tensor shapes disagree; message names both shapes.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument other than a shape mismatch (empty input, out-of-range value).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input files or generated data failed validation.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failure: divergence, non-finite values, gradient-check failure.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A cache was replayed against parameters it was not produced with.
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace multilstm

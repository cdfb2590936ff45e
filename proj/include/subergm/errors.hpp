#pragma once

#include <stdexcept>
#include <string>

namespace subergm {

// Malformed input text (edge lists, config files). Messages carry line numbers.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A whole computation stage failed numerically (empty aggregate, QP breakdown,
// degenerate prediction). Per-sample failures inside sweeps are status flags,
// not exceptions; this type is for failures the caller cannot ignore.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularDesignError : NumericError {
  using NumericError::NumericError;
};

struct IndefiniteHessianError : NumericError {
  using NumericError::NumericError;
};

struct InfeasibleError : NumericError {
  using NumericError::NumericError;
};

}  // namespace subergm

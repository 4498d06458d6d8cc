#pragma once

#include <stdexcept>
#include <string>

namespace dropnet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or rank disagreement between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Token, row or class index outside its valid range.
struct IndexError : Error {
  using Error::Error;
};

// A reduction or softmax slice with no valid positions.
struct MaskError : Error {
  using Error::Error;
};

// Invalid configuration value or unknown configuration key.
struct ConfigError : Error {
  using Error::Error;
};

// Violated call contract, e.g. backward on a non-scalar.
struct ContractError : Error {
  using Error::Error;
};

// Corpus or embedding file problem; message carries file/line context.
struct DataError : Error {
  using Error::Error;
};

// Unreadable, corrupt or version-mismatched checkpoint.
struct CheckpointError : Error {
  using Error::Error;
};

// Non-finite loss or a failed gradient check.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace dropnet

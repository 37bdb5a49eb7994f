#pragma once

#include <stdexcept>
#include <string>

namespace ndt {

// Shape or dimension mismatch between tensors/layers/records.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad labels, truncated or corrupt dataset files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or unknown configuration key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A call-sequence contract was violated (stale cache, wrong routing).
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Optimizer received a non-finite gradient or inconsistent state.
struct OptimizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An index or link is out of range.
struct IndexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ndt

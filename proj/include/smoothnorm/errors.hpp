#pragma once

#include <stdexcept>
#include <string>

namespace smoothnorm {

/// A group (or the whole dataset) is too small for the requested fit.
class insufficient_data_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The data admit no usable estimate (zero variance, non-finite values).
class degenerate_data_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A configuration value is out of its supported range.
class config_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-positive-definite matrix, failed
/// self-check). Distinct from input errors so callers can map it to a
/// different exit status.
class numerical_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace smoothnorm

#pragma once

#include <stdexcept>

namespace htlab {

/// A distribution or matrix description is self-inconsistent.
struct invalid_law : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parameters fall outside the regime an operation supports.
struct unsupported_regime : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parameters violate a limit-theorem validity window or a threshold
/// precondition.
struct regime_violation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A sparse part cannot be rearranged into disjoint pairs.
struct not_pairable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The small-instance oracle could not certify its answer.
struct oracle_uncertain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The instance is larger than the exact mode supports.
struct size_refusal : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace htlab

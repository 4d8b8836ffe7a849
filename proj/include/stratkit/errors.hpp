#pragma once

#include <stdexcept>
#include <string>

namespace stratkit {

/// File could not be opened, read, written, or parsed at the byte level.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input violates a documented contract (bad schema, out-of-range code,
/// infeasible design, degenerate data).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stratkit

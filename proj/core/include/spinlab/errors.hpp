#pragma once

#include <stdexcept>
#include <string>

namespace spinlab {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument / contract precondition violated.
struct parameter_error : error {
  using error::error;
};

// Problem size above an enumeration or dimension cap.
struct capacity_error : error {
  using error::error;
};

// Iterative numerics failed to converge; message carries the residual.
struct numeric_error : error {
  using error::error;
};

}  // namespace spinlab

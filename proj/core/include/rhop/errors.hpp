#pragma once

#include <stdexcept>
#include <string>

namespace rhop {

/// File-system or dataset-content failure (missing file, malformed record,
/// inconsistent dimensions). Maps to CLI exit code 2.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: integer overflow in walk counts, eigensolver
/// non-convergence, non-finite activations. Maps to CLI exit code 70.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a graph cannot be reconstructed from the available
/// provenance/encoding information.
struct recover_error : std::runtime_error {
  explicit recover_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rhop

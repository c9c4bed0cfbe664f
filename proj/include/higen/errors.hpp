#pragma once

#include <stdexcept>
#include <string>

namespace higen {

// Base class for all recoverable errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes (matmul inner dims, elementwise args, ...).
struct DimensionError : Error {
  using Error::Error;
};

// Input outside an operation's domain (empty softmax, all-zero tag vector, ...).
struct DomainError : Error {
  using Error::Error;
};

// Malformed file contents; message carries the byte offset where parsing failed.
struct FormatError : Error {
  using Error::Error;
};

// Violation of an internal API contract (non-scalar loss node, ...).
struct ContractError : Error {
  using Error::Error;
};

// Bad user-supplied data (missing JSON fields, unknown ids, ...).
struct DataError : Error {
  using Error::Error;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace higen

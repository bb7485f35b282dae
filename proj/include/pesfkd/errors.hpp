// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pesfkd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or widths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's mathematical domain (e.g. log of a non-positive value).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Violated calling contract (e.g. backward on a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, adapter or dataset description.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Hyperparameter out of its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or config does not match what the caller expects.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Input for which a statistic is undefined (e.g. CKA of a constant matrix).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace pesfkd

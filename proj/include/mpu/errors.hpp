#pragma once

#include <stdexcept>
#include <string>

namespace mpu {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (negative noise level, bad ratio, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Inputs that are structurally valid but degenerate (zero diagonal,
// too few points to downsample, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Tensor shape mismatches; message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// API contract violations (non-scalar loss, schema mismatch, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Bad training data (ratio mismatch in a pair, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// File parsing failures; message carries the line number where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// File format problems that are not line-level parse errors.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (unknown key, checkpoint/flag mismatch, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN encountered during training; message carries iteration, pair
// index and parameter name.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpu

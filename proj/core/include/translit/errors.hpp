// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace translit {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not agree for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A mask selects no position at all.
class InvalidMaskError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an API contract (e.g. backward from a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Id or index outside its valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Empty or otherwise unusable input.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Two files that must describe the same items do not.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint does not fit the expected vocabularies or format version.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration value or key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// I/O failure (missing file, unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN or infinite loss.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(int epoch, std::size_t batch, double loss)
      : Error("non-finite loss " + std::to_string(loss) + " at epoch " +
              std::to_string(epoch) + ", batch " + std::to_string(batch)),
        epoch_(epoch),
        batch_(batch),
        loss_(loss) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  double loss() const { return loss_; }

 private:
  int epoch_;
  std::size_t batch_;
  double loss_;
};

}  // namespace translit

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ddst {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes or sizes of the operands do not conform.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A matrix that must be Hermitian positive definite is not.
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

/// Invalid argument value (outside the documented domain).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Configuration file or CLI parameter problem. Maps to exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// File system / serialization failure. Maps to exit code 3.
class IoError : public Error {
public:
  using Error::Error;
};

/// Process exit status for an exception escaping a command: 2 for
/// configuration problems, 3 for I/O failures, 1 otherwise.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  return 1;
}

}  // namespace ddst

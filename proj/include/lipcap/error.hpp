// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lipcap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dimensions do not compose (wrong lengths, malformed matrices).
class ShapeError : public Error {
public:
  using Error::Error;
};

/// An argument is outside the operation's domain.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// A network or normalizer configuration is inconsistent or incomplete.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A numerical routine produced NaN/Inf.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace lipcap

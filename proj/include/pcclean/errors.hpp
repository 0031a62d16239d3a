// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared by every pcclean module. The CLI maps them onto
// process exit codes (usage 1, data 2, runtime 3).

#pragma once

#include <stdexcept>
#include <string>

namespace pcclean {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration: shapes, ranges, unknown enum values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or degenerate input data (files, empty clouds, unpaired data).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Failure while running a well-formed computation (e.g. rejection sampling
/// that could not terminate).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace pcclean

// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace encbnn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A handle was used with a context other than the one that created it.
class ContextMismatch : public Error {
 public:
  using Error::Error;
};

/// Scope begin/end calls did not pair up on the calling thread.
class ScopeError : public Error {
 public:
  using Error::Error;
};

/// Operand widths or tensor shapes do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed model/input document. `where()` is a JSON-pointer-like path.
class SchemaError : public Error {
 public:
  SchemaError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace encbnn

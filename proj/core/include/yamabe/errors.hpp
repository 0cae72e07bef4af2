#pragma once

#include <stdexcept>
#include <string>

namespace yamabe {

/// Malformed or inconsistent caller-supplied data.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or layout mismatch in a matrix or element argument.
class ShapeError : public InputError {
public:
  explicit ShapeError(const std::string& what) : InputError(what) {}
};

/// Operands built over different ring contexts.
class ContextError : public InputError {
public:
  explicit ContextError(const std::string& what) : InputError(what) {}
};

/// Input is meaningful but outside what the implementation carries through.
class UnsupportedError : public InputError {
public:
  explicit UnsupportedError(const std::string& what) : InputError(what) {}
};

/// Floating-point computation cannot proceed (singular sample, degenerate fit).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A cross-check that must never fail did; indicates a bug, not bad input.
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace yamabe

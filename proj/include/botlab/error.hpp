#pragma once

#include <stdexcept>
#include <string>

namespace botlab {

/// Broad failure category, mapped onto CLI exit codes and HTTP statuses.
enum class ErrorKind {
  Validation,       // malformed or invariant-violating input
  Io,               // filesystem failures
  VersionMismatch,  // artifacts built against different registries/models
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class VersionMismatch : public Error {
 public:
  explicit VersionMismatch(const std::string& what)
      : Error(ErrorKind::VersionMismatch, what) {}
};

}  // namespace botlab

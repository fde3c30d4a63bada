#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vdomc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTag : public Error {
 public:
  using Error::Error;
};

class DuplicateKey : public Error {
 public:
  using Error::Error;
};

// An explicit flag does not hold for the supplied children.
class FlagViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class DuplicateStaticKey : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class MalformedModule : public Error {
 public:
  using Error::Error;
};

class PathTypeError : public Error {
 public:
  using Error::Error;
};

class IndexOutOfBounds : public Error {
 public:
  using Error::Error;
};

// A patch path did not resolve against the live tree. Always a diff/patch
// contract violation.
class PatchPathError : public Error {
 public:
  using Error::Error;
};

class UnknownRoot : public Error {
 public:
  using Error::Error;
};

}  // namespace vdomc

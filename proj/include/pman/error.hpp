#pragma once

#include <stdexcept>
#include <string>

namespace pman {

/// Base of every error the toolkit throws. The subclass tells the CLI which
/// exit code to use.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad JSON, missing fields, empty
/// fields, missing labels).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON. Carries the byte offset reported by the parser.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : DataError(what), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Invalid configuration: bad schedule, unknown backend, scripted response
/// missing or exhausted, unresolvable credentials.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Network-level failure after all transport retries. Never a model outcome.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace pman

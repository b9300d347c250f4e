#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace linerank {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input that violates a data invariant (duplicate ids, dangling references,
/// disconnected network, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Argument outside the domain of a numeric routine (non-positive reactance, dimension mismatch).
class DomainError : public Error {
public:
  using Error::Error;
};

/// The linear network model could not be built (Laplacian rank is wrong).
class ModelError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed or two solution routes disagreed.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace linerank

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emojichat {

// Base for every error the library raises on bad input or bad state.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. line() is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Precondition or invariant violated by a caller-supplied value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Candidate vectors no longer match the candidate encoder.
class StalePoolError : public Error {
 public:
  using Error::Error;
};

// Required artifacts (bundle, classifier, emoji map) are not loaded.
class ServiceUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace emojichat

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptcure {

// Malformed input text. `line()` is 1-based and counts every physical line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a contract (bad status value, non-positive time,
// inconsistent dimensions, invalid configuration field ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation could not produce a usable number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ptcure

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proxyshift {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or malformed model/data (dimensions, probabilities, indices).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A matrix that must have linearly independent rows does not.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

// A probability ratio has a zero denominator because a cell has no data.
class EmptyCellError : public Error {
 public:
  using Error::Error;
};

// File or text parse failure; line is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace proxyshift

#pragma once

#include <stdexcept>
#include <string>

namespace coopmimo {

// Invalid parameters or malformed configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A factorization failed, a threshold is undefined, or an integral diverges
// (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by drop construction when a cell holds more users than pilots.
class CellOverflowError : public std::runtime_error {
 public:
  CellOverflowError(std::size_t cell, std::size_t count, std::size_t limit)
      : std::runtime_error("cell " + std::to_string(cell) + " has " + std::to_string(count) +
                           " users, pilot length allows " + std::to_string(limit)),
        cell_(cell),
        count_(count) {}
  std::size_t cell() const { return cell_; }
  std::size_t count() const { return count_; }

 private:
  std::size_t cell_;
  std::size_t count_;
};

}  // namespace coopmimo

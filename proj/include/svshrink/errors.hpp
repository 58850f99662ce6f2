#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svshrink {

// Caller broke a documented precondition. The CLI maps these to exit code 2.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

class RangeError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ParseError : public ContractError {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The numerics could not produce a trustworthy answer. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSpectrumError : public NumericalError {
 public:
  DegenerateSpectrumError(const std::string& what, std::ptrdiff_t first, std::ptrdiff_t second);
  std::ptrdiff_t first() const noexcept { return first_; }
  std::ptrdiff_t second() const noexcept { return second_; }

 private:
  std::ptrdiff_t first_;
  std::ptrdiff_t second_;
};

class SolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace svshrink

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epinet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed edge-list input. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid rates, missing variant fields, bad contact matrix.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A dense state space larger than the configured cap was requested.
class CapacityError : public Error {
 public:
  CapacityError(std::size_t requested, std::size_t cap)
      : Error("state space of " + std::to_string(requested) +
              " states exceeds the cap of " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  std::size_t requested() const noexcept { return requested_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An internal consistency check failed (a proven inequality or identity was
/// violated beyond floating-point tolerance).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace epinet

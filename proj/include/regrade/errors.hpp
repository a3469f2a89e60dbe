#pragma once

#include <stdexcept>
#include <string>

namespace regrade {

/// Invalid argument to an operation (bad index, non-positive scale, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Malformed input file. Carries a human-readable position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t byte)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", byte " +
                           std::to_string(byte) + ")"),
        line_(line),
        byte_(byte) {}
  std::size_t line() const { return line_; }
  std::size_t byte() const { return byte_; }

 private:
  std::size_t line_;
  std::size_t byte_;
};

/// Degenerate least-squares system (too few points or collinear support).
class RankError : public std::runtime_error {
 public:
  explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Lattice search exhausted its expansion budget without reaching the goal.
class PlanningError : public std::runtime_error {
 public:
  explicit PlanningError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Internal solver failure (should not occur for well-posed inputs).
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace regrade

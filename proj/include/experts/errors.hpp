#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace experts {

// Input violates an operation's precondition or a closed form's validity range.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured computation cap (usually the potential cap on a state) was exceeded.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A memo table was produced for a different (b, d) than the current run.
class IncompatibleMemoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An adversary or forecaster emitted something the game protocol forbids.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace experts

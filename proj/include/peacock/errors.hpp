#pragma once

#include <stdexcept>
#include <string>

namespace peacock {

// A message arrived that the receiving entity's state machine cannot accept
// (duplicate probe, assignment without reservation, double finish...).
class ProtocolViolation : public std::logic_error {
 public:
  explicit ProtocolViolation(const std::string& what) : std::logic_error(what) {}
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidProbe : public std::invalid_argument {
 public:
  explicit InvalidProbe(const std::string& what) : std::invalid_argument(what) {}
};

class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Run exceeded its event budget or ended in a non-quiescent state.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace peacock

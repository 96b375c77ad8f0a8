#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kgeval {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class LookupError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TrainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

}  // namespace kgeval

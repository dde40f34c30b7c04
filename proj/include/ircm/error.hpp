#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ircm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unparsable reference table. Carries the offending file and line
// (line 0 when the file itself is the problem).
class ConfigError : public Error {
 public:
  ConfigError(std::string file, std::size_t line, const std::string& what)
      : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Unreadable input or unknown input format.
class InputError : public Error {
 public:
  using Error::Error;
};

// Cross-file inconsistency, e.g. a resolution that names an unknown paper.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace ircm

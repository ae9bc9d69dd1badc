#pragma once

#include <stdexcept>
#include <string>

namespace esrlab {

// Failure categories map one-to-one onto CLI exit codes.
enum class ErrorKind { config = 2, data = 3, fit = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(ErrorKind::fit, what) {}
};

}  // namespace esrlab

#pragma once

#include <stdexcept>
#include <string>

namespace softsqueeze {

/// Base class for every error raised by the library. The kind maps onto the
/// CLI exit codes (config/spec 2, numerical 3, resource 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};

class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what),
        key_path_(std::move(key_path)) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

/// Raised when ξ² cannot be defined (vanishing Bloch vector) or a series has
/// no usable point.
class AnalysisError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ResourceError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

}  // namespace softsqueeze

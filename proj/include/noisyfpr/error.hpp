#pragma once

#include <stdexcept>
#include <string>

namespace noisyfpr {

/// Base for every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or manifest (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Manifest problem; the message names the offending key or column.
class SchemaError : public ConfigError {
 public:
  SchemaError(std::string key, const std::string& what)
      : ConfigError("schema error [" + key + "]: " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Unreadable or inconsistent input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A verification check failed (exit code 3).
class CheckFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace noisyfpr

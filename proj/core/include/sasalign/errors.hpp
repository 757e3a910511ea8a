#pragma once

#include <stdexcept>
#include <string>

namespace sas {

// Bad or missing configuration (unknown keys, invalid values). CLI maps this
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed persisted data (dataset lines, model bundles). CLI maps this to
// exit code 1. Messages name the offending line where applicable.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solver failed to converge; message carries the residual.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sas

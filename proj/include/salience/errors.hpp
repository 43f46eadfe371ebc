#pragma once

#include <stdexcept>
#include <string>

namespace salience {

// Data-level failures: malformed input, dangling references, schema
// mismatches. CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax or structural failures while reading the interchange format.
class ParseError : public DataError {
 public:
  explicit ParseError(const std::string& msg) : DataError(msg) {}
};

// Invalid arguments or flags. CLI maps these to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer or model failures (non-convergence, separation, rank
// deficiency). CLI maps these to exit code 3.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace salience

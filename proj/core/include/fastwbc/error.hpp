#pragma once

#include <stdexcept>
#include <string>

namespace fastwbc {

// Bad input: shapes, schema, config, out-of-range parameters. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite state, loss or statistic that aborts a run. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fastwbc

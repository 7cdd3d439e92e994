#ifndef CVP_ERRORS_HPP
#define CVP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cvp {

/// Invalid user input: unknown kernel, bad parameters, malformed config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: indefinite Gram matrix, empty retained spectrum, etc.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problem size exceeds the configured dense-storage cap.
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cvp

#endif  // CVP_ERRORS_HPP

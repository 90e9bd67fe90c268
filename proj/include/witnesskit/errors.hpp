#pragma once

#include <stdexcept>
#include <string>

namespace wkit {

// Invalid model, decomposition or configuration (caught at construction/validation).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Recorded data fails a recomputation or digest check.
class DataIntegrityError : public std::runtime_error {
 public:
  explicit DataIntegrityError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric argument outside the domain of a statistical kernel.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wkit

#pragma once

#include <stdexcept>
#include <string>

namespace epf {

/// Malformed or schema-violating input (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Valid input that cannot be processed as requested (CLI exit code 1).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace epf

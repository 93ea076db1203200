#pragma once

#include <stdexcept>
#include <string>

namespace vmdiff {

// Base class for all library errors. Specific types below match the failure
// modes named in the public operation contracts.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ZeroVector : public Error {
 public:
  explicit ZeroVector(const std::string& what = "zero-norm vector") : Error(what) {}
};

class DimMismatch : public Error {
 public:
  explicit DimMismatch(const std::string& what) : Error(what) {}
};

class NonPositiveScale : public Error {
 public:
  explicit NonPositiveScale(const std::string& what) : Error(what) {}
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& what) : Error(what) {}
};

class InvalidStrategy : public Error {
 public:
  explicit InvalidStrategy(const std::string& what) : Error(what) {}
};

class BackendFailure : public Error {
 public:
  explicit BackendFailure(const std::string& what) : Error(what) {}
};

class ProviderFailure : public Error {
 public:
  explicit ProviderFailure(const std::string& what) : Error(what) {}
};

class NonFiniteInput : public Error {
 public:
  explicit NonFiniteInput(const std::string& what) : Error(what) {}
};

class NonFiniteObjective : public Error {
 public:
  explicit NonFiniteObjective(const std::string& what) : Error(what) {}
};

class EmptySet : public Error {
 public:
  explicit EmptySet(const std::string& what) : Error(what) {}
};

}  // namespace vmdiff

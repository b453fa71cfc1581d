#pragma once

#include <stdexcept>
#include <string>

namespace levysieve {

// Base class for everything the library throws on a contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A user-supplied function returned a non-finite value at a quadrature node.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double location)
      : Error(what), location_(location) {}
  double location() const { return location_; }

 private:
  double location_;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DegreeTooHighError : public Error {
 public:
  using Error::Error;
};

class HorizonTooSmallError : public Error {
 public:
  HorizonTooSmallError(const std::string& what, double min_sup_constant)
      : Error(what), min_sup_constant_(min_sup_constant) {}
  double min_sup_constant() const { return min_sup_constant_; }

 private:
  double min_sup_constant_;
};

class NumericalConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key)
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace levysieve

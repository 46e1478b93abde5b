#pragma once

#include <stdexcept>
#include <string>

namespace arlearn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain (negative value, q outside [0,1], ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// A correlated generator broke its declared contract (e.g. exceeded its cap).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Zero density where a virtual value is required.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double point)
      : Error(what), point_(point) {}
  double point() const noexcept { return point_; }

 private:
  double point_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace arlearn

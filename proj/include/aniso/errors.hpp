#pragma once

#include <stdexcept>
#include <string>

namespace aniso {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. H evaluated at the origin).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent parameters or malformed call.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Grid too small for the requested stencil.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Value outside an admissible range (e.g. inverting the gauge past t_max).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A structural hypothesis on (B, H) failed at an evaluated point.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Point excluded from a computation that needs a non-degenerate gradient.
class ExcludedPointError : public Error {
 public:
  using Error::Error;
};

/// Every grid point was excluded, nothing to report.
class EmptyReportError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class CertificationError : public Error {
 public:
  using Error::Error;
};

class NoHeteroclinicError : public Error {
 public:
  using Error::Error;
};

/// The profile ODE reached a point where B'' vanishes.
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, double location)
      : Error(what), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

class ExtentError : public Error {
 public:
  using Error::Error;
};

class StagnationError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace aniso

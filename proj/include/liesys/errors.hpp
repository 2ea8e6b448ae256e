#pragma once

#include <stdexcept>
#include <string>

namespace liesys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose dimensions do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a genuine singularity of a field or formula (x = 0 for k/x^3, ...).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A formula left its real domain: negative radicand, zero divisor, point outside a half-plane.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double offending_value)
      : Error(what), value_(offending_value) {}
  explicit DomainError(const std::string& what) : Error(what) {}

  double offending_value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

/// Two solutions that were required to be independent are not (k = 0, W = 0).
class DependentSolutionsError : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator gave up. `last_good_time` is the last accepted time.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

/// Non-finite integrand sample or unreachable tolerance in quadrature.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double abscissa) : Error(what), abscissa_(abscissa) {}

  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

/// Malformed scenario or command-line input. `field` names the offending key.
class UsageError : public Error {
 public:
  UsageError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace liesys

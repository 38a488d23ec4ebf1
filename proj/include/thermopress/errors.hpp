#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace thermopress {

/// Base class for all library errors that are not plain precondition
/// violations (those throw std::invalid_argument).
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when an operation requires a mixing (primitive) model and the
/// transition pattern is not primitive.
class not_mixing_error : public error {
 public:
  explicit not_mixing_error(const std::string& msg) : error(msg) {}
};

/// Thrown when an observable is cohomologous to a constant and the requested
/// quantity is undefined for degenerate data.
class degeneracy_error : public error {
 public:
  explicit degeneracy_error(const std::string& msg, double sigma2 = 0.0)
      : error(msg), sigma2(sigma2) {}
  double sigma2;
};

/// Thrown when a requested point lies outside the approximated domain of a
/// rate function; carries the domain endpoints.
class domain_error : public error {
 public:
  domain_error(const std::string& msg, double lo, double hi)
      : error(msg), s_min(lo), s_max(hi) {}
  double s_min;
  double s_max;
};

/// Thrown when an enumeration would exceed the configured word budget.
class resource_limit_error : public error {
 public:
  resource_limit_error(const std::string& msg, std::uint64_t required,
                       std::uint64_t budget)
      : error(msg), required(required), budget(budget) {}
  std::uint64_t required;
  std::uint64_t budget;
};

/// Thrown on solver non-convergence; the message carries diagnostics.
class numerical_error : public error {
 public:
  explicit numerical_error(const std::string& msg) : error(msg) {}
};

}  // namespace thermopress

#pragma once

#include <stdexcept>
#include <string>

namespace oamlens::core
{

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its tolerance. Carries the best
/// estimate that was reached so callers can decide whether to use it.
class NumericalError : public std::runtime_error
{
public:
  NumericalError(const std::string& what, double estimate, double error_estimate)
      : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate)
  {
  }
  explicit NumericalError(const std::string& what)
      : NumericalError(what, 0.0, 0.0)
  {
  }

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double estimate_;
  double error_estimate_;
};

/// Invalid configuration (grid too coarse, malformed input file, schema
/// violation). The message names the offending field or bound.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace oamlens::core

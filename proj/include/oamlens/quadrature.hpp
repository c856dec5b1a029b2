#pragma once

#include <cstddef>
#include <functional>

namespace oamlens::core
{

struct QuadratureOptions
{
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  /// Length scale s of the tangent map z = s tan(t) used for infinite limits.
  /// Pick something close to the width of the integrand.
  double scale = 1.0;
  std::size_t max_subintervals = 4000;
  /// Infinite ranges are truncated where |integrand| (in the mapped variable)
  /// drops below this fraction of its sampled peak.
  double truncation_fraction = 1e-14;
};

struct QuadratureResult
{
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  std::size_t subintervals = 0;
  /// Physical z limits actually integrated. Equal to the requested limits
  /// unless an infinite range was truncated.
  double effective_min = 0.0;
  double effective_max = 0.0;
  bool truncated = false;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [z_min, z_max].
/// Either limit may be infinite; semi-infinite and infinite ranges are
/// mapped with z = z0 + scale * tan(t). Converges when the global error
/// estimate is below max(abs_tol, rel_tol * |value|).
/// Throws NumericalError (with the estimate attached) when the subinterval
/// budget runs out, DomainError for bad tolerances or a non-finite integrand.
QuadratureResult integrate_line(const std::function<double(double)>& f, double z_min,
                                double z_max, const QuadratureOptions& options = {});

/// Convenience overload matching the plain (f, z_min, z_max, rel_tol) form.
double integrate_line(const std::function<double(double)>& f, double z_min, double z_max,
                      double rel_tol);

} // namespace oamlens::core

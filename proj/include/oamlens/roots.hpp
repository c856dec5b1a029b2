#pragma once

#include <functional>

namespace oamlens::core
{

/// Brent's method on a bracketing interval [lo, hi] with f(lo) f(hi) <= 0.
/// Throws DomainError if the interval does not bracket a root.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 0.0, int max_iterations = 200);

} // namespace oamlens::core

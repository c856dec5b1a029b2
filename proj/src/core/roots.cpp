#include "oamlens/roots.hpp"

#include "oamlens/errors.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace oamlens::core
{

double find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                 int max_iterations)
{
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0)
    return a;
  if (fb == 0.0)
    return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw DomainError("find_root: interval does not bracket a root");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iterations; ++iter)
  {
    if ((fb > 0.0) == (fc > 0.0))
    {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb))
    {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * eps * std::abs(b) + 0.5 * x_tol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0)
      return b;

    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb))
    {
      double p, q;
      const double s = fb / fa;
      if (a == c)
      {
        p = 2.0 * m * s;
        q = 1.0 - s;
      }
      else
      {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0)
        q = -q;
      else
        p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q)))
      {
        e = d;
        d = p / q;
      }
      else
      {
        d = m;
        e = m;
      }
    }
    else
    {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw NumericalError("find_root: no convergence", b, std::abs(c - b));
}

} // namespace oamlens::core

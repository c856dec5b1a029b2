#include "oamlens/quadrature.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace oamlens::core
{
namespace
{

// Kronrod abscissae on [0, 1]; odd entries are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Segment
{
  double lo, hi, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class G>
Segment gauss_kronrod(const G& g, double lo, double hi, std::size_t& evaluations)
{
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = g(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j)
  {
    const double dx = half * kXgk[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1)
      gauss += kWg[j / 2] * (f1 + f2);
  }
  evaluations += 15;
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace

QuadratureResult integrate_line(const std::function<double(double)>& f, double z_min,
                                double z_max, const QuadratureOptions& options)
{
  if (!(options.rel_tol > 0.0 || options.abs_tol > 0.0) || options.rel_tol < 0.0 ||
      options.abs_tol < 0.0)
    throw DomainError("integrate_line: need a positive rel_tol or abs_tol");
  if (!(options.scale > 0.0))
    throw DomainError("integrate_line: scale must be positive");
  if (std::isnan(z_min) || std::isnan(z_max))
    throw DomainError("integrate_line: NaN limit");

  double sign = 1.0;
  if (z_max < z_min)
  {
    std::swap(z_min, z_max);
    sign = -1.0;
  }

  QuadratureResult result;
  result.effective_min = z_min;
  result.effective_max = z_max;
  if (z_min == z_max)
    return result;

  const bool lo_inf = std::isinf(z_min);
  const bool hi_inf = std::isinf(z_max);
  const double s = options.scale;

  // Map to a finite t-interval. Finite ranges use the identity map.
  double origin = 0.0;
  double t_lo = z_min, t_hi = z_max;
  const bool mapped = lo_inf || hi_inf;
  if (lo_inf && hi_inf)
  {
    t_lo = -0.5 * pi;
    t_hi = 0.5 * pi;
  }
  else if (hi_inf)
  {
    origin = z_min;
    t_lo = 0.0;
    t_hi = 0.5 * pi;
  }
  else if (lo_inf)
  {
    origin = z_max;
    t_lo = -0.5 * pi;
    t_hi = 0.0;
  }

  auto to_z = [&](double t) { return mapped ? origin + s * std::tan(t) : t; };
  auto g = [&](double t) {
    double value;
    if (mapped)
    {
      const double c = std::cos(t);
      value = c == 0.0 ? 0.0 : f(origin + s * std::tan(t)) * s / (c * c);
    }
    else
    {
      value = f(t);
    }
    if (!std::isfinite(value))
      throw DomainError("integrate_line: integrand is not finite at z = " +
                        std::to_string(to_z(t)));
    return value;
  };

  if (mapped)
  {
    // Trim the mapped interval where the integrand is negligible so the
    // adaptive loop does not spend its budget next to the poles of tan.
    constexpr int samples = 4096;
    std::vector<double> values(samples + 1, 0.0);
    const double dt = (t_hi - t_lo) / samples;
    const double t_mid = 0.5 * (t_lo + t_hi);
    // Sample positions are symmetric about t_mid so that symmetric integrands
    // get a symmetric truncation.
    auto t_at = [&](int i) { return t_mid + (i - samples / 2) * dt; };
    double peak = 0.0;
    for (int i = 1; i < samples; ++i)
    {
      values[i] = std::abs(g(t_at(i)));
      peak = std::max(peak, values[i]);
    }
    result.evaluations += samples - 1;
    if (peak == 0.0)
      return result;
    const double floor = options.truncation_fraction * peak;
    int first = 1, last = samples - 1;
    while (first < samples - 1 && values[first] < floor)
      ++first;
    while (last > 1 && values[last] < floor)
      --last;
    const double new_lo = first > 1 ? t_at(first - 1) : t_lo;
    const double new_hi = last < samples - 1 ? t_at(last + 1) : t_hi;
    result.truncated = new_lo > t_lo || new_hi < t_hi;
    result.effective_min = new_lo == t_lo ? z_min : to_z(new_lo);
    result.effective_max = new_hi == t_hi ? z_max : to_z(new_hi);
    t_lo = new_lo;
    t_hi = new_hi;
  }

  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(g, t_lo, t_hi, result.evaluations);
  double total = first.value;
  double total_error = first.error;
  heap.push(first);

  auto converged = [&] {
    return total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  };

  while (!converged())
  {
    if (heap.size() >= options.max_subintervals)
      throw NumericalError("integrate_line: subinterval budget exhausted", sign * total,
                           total_error);
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi))
      throw NumericalError("integrate_line: interval cannot be subdivided further",
                           sign * total, total_error);
    Segment left = gauss_kronrod(g, worst.lo, mid, result.evaluations);
    Segment right = gauss_kronrod(g, mid, worst.hi, result.evaluations);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from the pieces so cancellation in the running total does not
  // leak into the reported value.
  double sum = 0.0, err = 0.0;
  result.subintervals = heap.size();
  while (!heap.empty())
  {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  result.value = sign * sum;
  result.error_estimate = err;
  return result;
}

double integrate_line(const std::function<double(double)>& f, double z_min, double z_max,
                      double rel_tol)
{
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
    throw DomainError("integrate_line: rel_tol must lie in (0, 1e-2]");
  QuadratureOptions options;
  options.rel_tol = rel_tol;
  return integrate_line(f, z_min, z_max, options).value;
}

} // namespace oamlens::core

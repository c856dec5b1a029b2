#include "oamlens/fields.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"
#include "oamlens/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oamlens::fields
{
namespace
{

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b)
{
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 cross(const Vec3& a, const Vec3& b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// (1 - m/2) K(m) - E(m) with parameter m = k^2. The two terms cancel to
// O(m^2) so small m goes through the power series.
double loop_kernel(double m)
{
  if (m < 0.25)
  {
    // Coefficient of m^n is (pi/2) c_n^2 2n/(2n-1) - (pi/4) c_{n-1}^2,
    // c_n = (2n)! / (4^n n!^2).
    double c_prev = 1.0; // c_0^2
    double mn = m;       // m^1
    double sum = 0.0;
    for (int n = 1; n < 40; ++n)
    {
      const double ratio = (2.0 * n - 1.0) / (2.0 * n);
      const double c_n = c_prev * ratio * ratio;
      const double term = (core::pi / 2.0) * c_n * (2.0 * n) / (2.0 * n - 1.0) -
                          (core::pi / 4.0) * c_prev;
      sum += term * mn;
      mn *= m;
      c_prev = c_n;
      if (std::abs(term * mn) < 1e-18 * std::abs(sum))
        break;
    }
    return sum;
  }
  const double k = std::sqrt(m);
  return (1.0 - m / 2.0) * std::comp_ellint_1(k) - std::comp_ellint_2(k);
}

// Azimuthal vector potential of a circular loop (radius a, current I) at
// cylindrical position (rho, z) in the loop's own frame.
double loop_a_phi(double current, double a, double rho, double z)
{
  if (rho <= 0.0)
    return 0.0;
  const double m = 4.0 * a * rho / ((a + rho) * (a + rho) + z * z);
  if (m >= 1.0)
    throw core::DomainError("field point lies on a current loop");
  return core::PhysicalConstants::mu0 * current / (core::pi * std::sqrt(m)) *
         std::sqrt(a / rho) * loop_kernel(m);
}

struct Solenoid
{
  Vec3 centre;
  Vec3 axis; // unit
  double sign;
};

// A . phi_hat at point p from a stack of loops.
double solenoid_a_dot(const Solenoid& s, const MultipoleGeometry& g, double current,
                      const Vec3& p, const Vec3& phi_hat)
{
  const int n = g.loops_per_solenoid;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
  {
    const double offset = n == 1 ? 0.0 : g.length * (static_cast<double>(i) / (n - 1) - 0.5);
    const Vec3 r = {p[0] - s.centre[0] - offset * s.axis[0],
                    p[1] - s.centre[1] - offset * s.axis[1],
                    p[2] - s.centre[2] - offset * s.axis[2]};
    const double axial = dot(r, s.axis);
    const Vec3 perp = {r[0] - axial * s.axis[0], r[1] - axial * s.axis[1],
                       r[2] - axial * s.axis[2]};
    const double rho = std::sqrt(dot(perp, perp));
    if (rho == 0.0)
      continue;
    const double a_phi = loop_a_phi(current, g.loop_radius, rho, axial);
    const Vec3 dir = cross(s.axis, perp);
    total += s.sign * a_phi * dot(dir, phi_hat) / rho;
  }
  return total;
}

void check_geometry(const MultipoleGeometry& g)
{
  if (!(g.ring_radius > 0.0) || !(g.loop_radius > 0.0) || !(g.length > 0.0) ||
      g.loops_per_solenoid < 1)
    throw core::DomainError("invalid multipole geometry");
}

// Loop current that makes mu0 (N I / L) pi r^2 equal to the requested flux.
double loop_current(double strength, const MultipoleGeometry& g)
{
  return strength * g.length /
         (core::PhysicalConstants::mu0 * g.loops_per_solenoid * core::pi * g.loop_radius *
          g.loop_radius);
}

double line_integral(const std::vector<Solenoid>& solenoids, const MultipoleGeometry& g,
                     double current, double rho, double phi, double strength)
{
  const Vec3 phi_hat = {-std::sin(phi), std::cos(phi), 0.0};
  const double x = rho * std::cos(phi), y = rho * std::sin(phi);
  auto integrand = [&](double z) {
    const Vec3 p = {x, y, z};
    double sum = 0.0;
    for (const auto& s : solenoids)
      sum += solenoid_a_dot(s, g, current, p, phi_hat);
    return sum;
  };
  core::QuadratureOptions options;
  options.rel_tol = 1e-10;
  options.abs_tol = 1e-14 * std::abs(strength);
  options.scale = g.ring_radius;
  return core::integrate_line(integrand, -std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity(), options)
      .value;
}

} // namespace

MultipoleGeometry default_multipole_geometry(double solenoid_extent)
{
  if (!(solenoid_extent > 0.0))
    throw core::DomainError("solenoid extent must be positive");
  MultipoleGeometry g;
  g.ring_radius = solenoid_extent;
  g.loop_radius = solenoid_extent / 4.0;
  g.length = solenoid_extent;
  return g;
}

double multipole_phi_integral(int n_poles, double solenoid_strength, double solenoid_extent,
                              double rho, double phi)
{
  return multipole_phi_integral(n_poles, solenoid_strength,
                                default_multipole_geometry(solenoid_extent), rho, phi);
}

double multipole_phi_integral(int n_poles, double solenoid_strength,
                              const MultipoleGeometry& geometry, double rho, double phi)
{
  if (n_poles < 2 || n_poles % 2 != 0)
    throw core::DomainError("multipole order must be even and at least 2");
  if (!(rho >= 0.0))
    throw core::DomainError("rho must be non-negative");
  check_geometry(geometry);

  std::vector<Solenoid> solenoids;
  for (int k = 0; k < n_poles; ++k)
  {
    const double theta = 2.0 * core::pi * k / n_poles;
    const Vec3 axis = {std::cos(theta), std::sin(theta), 0.0};
    solenoids.push_back({{geometry.ring_radius * axis[0], geometry.ring_radius * axis[1], 0.0},
                         axis,
                         k % 2 == 0 ? 1.0 : -1.0});
  }
  return line_integral(solenoids, geometry, loop_current(solenoid_strength, geometry), rho, phi,
                       solenoid_strength);
}

double axial_solenoid_phi_integral(double solenoid_strength, const MultipoleGeometry& geometry,
                                   double rho)
{
  if (!(rho > 0.0))
    throw core::DomainError("rho must be positive");
  check_geometry(geometry);
  const std::vector<Solenoid> solenoids = {{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, 1.0}};
  return line_integral(solenoids, geometry, loop_current(solenoid_strength, geometry), rho, 0.0,
                       solenoid_strength);
}

} // namespace oamlens::fields

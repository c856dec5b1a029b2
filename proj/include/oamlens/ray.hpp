#pragma once

#include "oamlens/analytic.hpp"
#include "oamlens/beam.hpp"
#include "oamlens/fields.hpp"

#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace oamlens::ray
{

/// Paraxial ray in the meridional plane. For m = 0 rho is signed so a ray can
/// pass through the axis; for m != 0 it stays positive.
struct RayState
{
  double z = 0.0;
  double rho = 0.0;
  double rho_prime = 0.0;
  int m = 0;
};

enum class EventKind
{
  AxisCrossing,  // rho changes sign (m = 0)
  RadialMinimum, // rho' goes from negative to positive
};

struct RayEvent
{
  EventKind kind;
  double z;
  double rho;
};

struct RayTrajectory
{
  std::vector<RayState> samples;
  std::vector<RayEvent> events;
  int m = 0;
  std::string column_description;
  /// |rho| exceeded the dispersion length of a lens while inside its field.
  bool beyond_dispersion_length = false;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// Sum of the local error estimates on rho over accepted steps (m).
  double error_estimate = 0.0;
};

enum class Integrator
{
  DormandPrince,
  FixedStepRK4,
};

struct TraceOptions
{
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  Integrator integrator = Integrator::DormandPrince;
  /// Step for FixedStepRK4 (m).
  double fixed_step = 0.0;
  /// Planes where samples are recorded by dense output. Empty: every
  /// accepted step is recorded. The start and end planes are always kept.
  std::vector<double> sample_planes;
  std::size_t max_steps = 2'000'000;
};

/// d^2 rho / dz^2 for the column field.
///
/// With canonical angular momentum m hbar the azimuthal kinetic momentum is
/// m hbar / rho + e A_phi. Keeping terms up to rho^2 in its square gives the
/// effective radial potential
///   [ (m hbar)^2 / rho^2 + (e^2 B1^2 / 4 - m hbar e B3 / (4 b^2)) rho^2 ] / (2 m_e),
/// and dividing the radial force by (m_e v)^2 = p^2 converts time to z:
///   rho'' = (m / k)^2 / rho^3 - (e^2 B1^2 - e (B3 / b^2) m hbar) rho / (4 p^2).
/// Throws DomainError for rho = 0 with m != 0.
double radial_rhs(const RayState& state, const analytic::OpticalColumn& column,
                  const core::BeamParameters& beam);
double radial_rhs(const RayState& state, const fields::AxialFieldModel& model,
                  const core::BeamParameters& beam, double z_center = 0.0);

/// Integrates from initial.z to z_end (> initial.z). Throws DomainError for
/// bad options, NumericalError on step-size collapse (typically a ray with
/// m != 0 driven onto the axis) or when max_steps is exceeded.
RayTrajectory trace(const RayState& initial, const analytic::OpticalColumn& column,
                    const core::BeamParameters& beam, double z_end,
                    const TraceOptions& options = {});

/// Traces independent rays on up to `threads` worker threads. Results are in
/// input order and do not depend on the thread count.
std::vector<RayTrajectory> trace_many(std::span<const RayState> initial,
                                      const analytic::OpticalColumn& column,
                                      const core::BeamParameters& beam, double z_end,
                                      const TraceOptions& options, unsigned threads);

struct FocalCrossing
{
  bool found = false;
  double z = 0.0;
  double rho = 0.0;
};

/// First axis crossing for m = 0, first radial minimum otherwise. Uses the
/// refined events when the trajectory has them, the samples otherwise
/// (linear interpolation of the crossing, parabola through the minimum).
FocalCrossing focal_crossing(const RayTrajectory& trajectory);

/// LG intensity peak radius w0 sqrt(|m| / 2).
double launch_radius(double w0, int m);

/// `z,rho,rho_prime,m` rows for every sample of every trajectory.
void write_trajectory_csv(std::ostream& out, std::span<const RayTrajectory> trajectories);

} // namespace oamlens::ray

#pragma once

#include <filesystem>
#include <vector>

namespace oamlens::fields
{

enum class FieldKind
{
  Glaser,
  WireLoop,
  Tabulated,
};

/// B1(z) and B3(z) of the model vector potential
///   A_phi = B1(z) rho / 2 - B3(z) rho^3 / (8 b^2).
struct AxialSample
{
  double b1 = 0.0; // T
  double b3 = 0.0; // T
};

/// Longitudinal field profile of a round lens. Immutable once built; use the
/// named constructors.
class AxialFieldModel
{
public:
  /// Lorentzian bell B0 / (1 + z^2/a^2) for both B1 and B3. b is independent.
  static AxialFieldModel glaser(double b0, double a, double b, int polarity = +1);

  /// Single current loop of radius R. B0 = mu0 I0 / R and b = R.
  static AxialFieldModel wire_loop_from_b0(double b0, double radius, int polarity = +1);
  static AxialFieldModel wire_loop_from_current(double current, double radius,
                                                int polarity = +1);

  /// Linear interpolation between samples. z strictly increasing. `b0` is the
  /// peak-field scale used to report shape factors; pass 0 to take max|B1|.
  static AxialFieldModel tabulated(std::vector<double> z, std::vector<double> b1,
                                   std::vector<double> b3, double b, int polarity = +1,
                                   double b0 = 0.0);

  FieldKind kind() const noexcept { return kind_; }
  double b0() const noexcept { return b0_; }
  double a() const noexcept { return a_; }
  double radius() const noexcept { return radius_; }
  double b() const noexcept { return b_; }
  int polarity() const noexcept { return polarity_; }

  const std::vector<double>& z_samples() const noexcept { return z_; }
  const std::vector<double>& b1_samples() const noexcept { return b1_; }
  const std::vector<double>& b3_samples() const noexcept { return b3_; }

  /// Same profile with the sign of the field reversed.
  AxialFieldModel with_polarity(int polarity) const;

  /// Characteristic longitudinal length: a for Glaser, R for a loop and the
  /// half-width of the sample range for tabulated fields.
  double longitudinal_extent() const noexcept;

  /// Closed interval outside which the field is treated as absent. Infinite
  /// for the analytic profiles.
  double support_min() const noexcept;
  double support_max() const noexcept;

private:
  AxialFieldModel() = default;

  FieldKind kind_ = FieldKind::Glaser;
  double b0_ = 0.0;
  double a_ = 0.0;
  double radius_ = 0.0;
  double b_ = 0.0;
  int polarity_ = 1;
  std::vector<double> z_, b1_, b3_;
};

/// Profile values at z (relative to the lens centre), polarity included.
/// Tabulated models throw DomainError outside their sample range.
AxialSample eval_axial_field(const AxialFieldModel& model, double z);

struct VectorPotential
{
  double a_phi = 0.0; // T m
  /// rho exceeded the dispersion length; the truncated expansion is
  /// degrading but still evaluated.
  bool beyond_dispersion_length = false;
};

VectorPotential vector_potential_phi(const AxialFieldModel& model, double rho, double z);

struct FieldIntegrals
{
  double b1_squared = 0.0; // int B1^2 dz, T^2 m
  double b3 = 0.0;         // int B3 dz, T m
  double b1 = 0.0;         // int B1 dz, T m
  double b1_b3 = 0.0;      // int B1 B3 dz, T^2 m
};

enum class IntegralPath
{
  /// Closed forms where they exist, quadrature otherwise.
  Preferred,
  Quadrature,
};

FieldIntegrals field_integrals(const AxialFieldModel& model,
                               IntegralPath path = IntegralPath::Preferred);

/// Reads a `z,B1,B3` CSV (SI units, one row per sample).
AxialFieldModel load_tabulated_csv(const std::filesystem::path& path, double b,
                                   int polarity = +1, double b0 = 0.0);

/// Geometry of the radial-solenoid multipole model. Each solenoid is a short
/// stack of coaxial current loops whose axis points away from the optic axis.
struct MultipoleGeometry
{
  double ring_radius = 0.0;  // distance of each solenoid centre from the axis
  double loop_radius = 0.0;  // radius of the loops forming a solenoid
  double length = 0.0;       // solenoid length along its own axis
  int loops_per_solenoid = 5;
};

/// Default geometry for a solenoid of the given length: centres at one
/// length from the axis, loop radius a quarter of the length.
MultipoleGeometry default_multipole_geometry(double solenoid_extent);

/// Line integral of A . phi_hat along the line parallel to the optic axis at
/// (rho, phi) for a ring of n radial solenoids with alternating polarity.
/// `solenoid_strength` is the flux carried by one solenoid (T m^2); the
/// result has the same units and is the thin-lens OAM coupling of the
/// corrector.
double multipole_phi_integral(int n_poles, double solenoid_strength, double solenoid_extent,
                              double rho, double phi);
double multipole_phi_integral(int n_poles, double solenoid_strength,
                              const MultipoleGeometry& geometry, double rho, double phi);

/// Control case: one solenoid of the same construction lying along the optic
/// axis. Its azimuthal potential does not cancel.
double axial_solenoid_phi_integral(double solenoid_strength, const MultipoleGeometry& geometry,
                                   double rho);

} // namespace oamlens::fields

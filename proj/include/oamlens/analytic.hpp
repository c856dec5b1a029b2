#pragma once

#include "oamlens/beam.hpp"
#include "oamlens/fields.hpp"

#include <span>
#include <string>
#include <vector>

namespace oamlens::analytic
{

struct LensElement
{
  fields::AxialFieldModel model;
  double z_center = 0.0; // m
};

struct Aperture
{
  double z = 0.0;      // m
  double radius = 0.0; // m
};

/// Lenses ordered along z plus apertures. `object_z` and `image_z` bound the
/// column for matrix composition (image_z is the exit plane, not a solved
/// conjugate).
struct OpticalColumn
{
  std::vector<LensElement> elements;
  std::vector<Aperture> apertures;
  double object_z = 0.0;
  double image_z = 0.0;

  /// Throws DomainError unless lens centres are finite and strictly
  /// increasing and apertures have positive radius.
  void validate() const;
};

/// Summed column field at z. B3 enters every formula as B3 / b^2, so the sum
/// is kept in that form to allow elements with different dispersion lengths.
struct ColumnFieldSample
{
  double b1 = 0.0;         // T
  double b3_over_b2 = 0.0; // T / m^2
};

/// Tabulated elements contribute zero outside their sample range.
ColumnFieldSample column_field(const OpticalColumn& column, double z);

/// One-line human readable summary of the lenses, used as provenance.
std::string describe(const OpticalColumn& column);

enum class FocalKind
{
  Converging,
  Diverging,
  Infinite,
};

struct FocalLength
{
  double value = 0.0; // m; +inf for FocalKind::Infinite
  FocalKind kind = FocalKind::Converging;
};

/// 1/f_m = e^2 / (4 p^2) * [I_B1sq - (m hbar / (e b^2)) I_B3], with p^2 = 2 m_e E
/// in the default kinematics.
FocalLength focal_length(const fields::AxialFieldModel& model, const core::BeamParameters& beam,
                         int m);
FocalLength focal_length(const fields::FieldIntegrals& integrals, double b,
                         const core::BeamParameters& beam, int m);

struct DispersionSummary
{
  double f0 = 0.0;     // m
  double lambda = 0.0; // dimensionless
  double beta0 = 0.0;  // dimensionless shape factor
};

/// Lambda = (hbar / (e b^2)) I_B3 / I_B1sq so that 1/f_m = (1 - Lambda m) / f0
/// holds exactly. Throws DomainError when I_B1sq is zero.
DispersionSummary dispersion_summary(const fields::AxialFieldModel& model,
                                     const core::BeamParameters& beam);

/// Linearised focal law f0 (1 + Lambda m).
double approx_focal_length(double f0, double lambda, int m);
/// Flux-quantum form with Lambda = beta1 / n_flux.
double approx_focal_length_flux(double f0, double beta1, double n_flux, int m);

/// -m e I_B1 / (2 p), the per-m phase picked up by an OAM mode (rad).
double larmor_phase(const fields::AxialFieldModel& model, const core::BeamParameters& beam,
                    int m);

/// C3 = e^2 f^4 I_B1B3 / (4 p^2 b^2). Throws DomainError for f <= 0.
double spherical_c3(const fields::AxialFieldModel& model, const core::BeamParameters& beam,
                    double f);

/// Acts on column vectors (rho, rho').
struct RayTransferMatrix
{
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;

  double determinant() const noexcept { return a * d - b * c; }
};

/// Product in matrix order: (lhs * rhs) applies rhs first.
RayTransferMatrix operator*(const RayTransferMatrix& lhs, const RayTransferMatrix& rhs);

/// Throws DomainError for f == 0. An infinite f gives the identity.
RayTransferMatrix thin_lens_matrix(double f);
RayTransferMatrix drift_matrix(double d);
/// Composition of matrices listed in propagation order.
RayTransferMatrix compose(std::span<const RayTransferMatrix> in_order);

struct ColumnMatrix
{
  RayTransferMatrix matrix;
  std::vector<FocalLength> focal_lengths;
  /// |f| > 10 * longitudinal extent for each element.
  std::vector<bool> thin_lens_valid;
  std::vector<std::string> warnings;
};

/// Thin-lens model of the column from object_z to image_z.
ColumnMatrix column_matrix(const OpticalColumn& column, const core::BeamParameters& beam, int m);

enum class ImageKind
{
  Finite,
  /// The image recedes to infinity: no drift makes B vanish.
  AtInfinity,
};

struct ImageSolution
{
  ImageKind kind = ImageKind::Finite;
  double image_distance = 0.0; // m, after the last plane of the system
  double magnification = 0.0;  // lateral, for Finite
  /// D entry of the system. For an afocal system (C = 0) this is the angular
  /// magnification.
  double angular_magnification = 0.0;
};

ImageSolution image_solve(const RayTransferMatrix& system, double object_distance);

struct AfocalMagnification
{
  double per_pair_exact = 0.0;  // -(1 + x) / (1 - x), x = Lambda m
  double per_pair_linear = 0.0; // -(1 + 2x)
  double exact = 0.0;           // per_pair_exact^N
  double approx = 0.0;          // (-1)^N exp(2 x N)
};

AfocalMagnification afocal_stack_magnification(double lambda, int m, int n_pairs);

/// Telescope pair under the linear focal law: f1 = f0 (1 - Lambda m),
/// drift 2 f0, f2 = f0 (1 + Lambda m).
RayTransferMatrix afocal_pair_matrix(double f0, double lambda, int m);
/// n_pairs such pairs placed back to back.
RayTransferMatrix afocal_stack_matrix(double f0, double lambda, int m, int n_pairs);

struct VariableSpacingMagnification
{
  double value = 0.0; // +-inf at the pole
  bool pole = false;
};

/// 1 / (1 - 2 (s + 1) Lambda m). Throws DomainError for s <= 0.
VariableSpacingMagnification variable_spacing_magnification(double lambda, int m, double s);

/// Two-lens imaging device used to check the formula above with matrices.
struct VariableSpacingDevice
{
  RayTransferMatrix system;     // lens 2 * drift * lens 1
  double object_distance = 0.0; // before lens 1
  double separation = 0.0;
};

/// Object at (s+1) f0 / s, lens 1 with f0 (1 + Lambda m), separation
/// 2 (s+1) f0, lens 2 with f0 (1 - Lambda m). Unit magnification at m = 0.
VariableSpacingDevice variable_spacing_device(double f0, double lambda, int m, double s);

/// n_lenses copies of `model` spaced by `spacing`, alternating polarity and
/// starting with `first_polarity`. object_z is the first centre minus
/// `spacing`, image_z the last centre plus `spacing`.
OpticalColumn alternating_stack(const fields::AxialFieldModel& model, int n_lenses,
                                double first_center, double spacing, int first_polarity);

} // namespace oamlens::analytic

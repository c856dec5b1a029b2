#include "oamlens/analytic.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace oamlens::analytic
{

using core::PhysicalConstants;

void OpticalColumn::validate() const
{
  for (std::size_t i = 0; i < elements.size(); ++i)
  {
    if (!std::isfinite(elements[i].z_center))
      throw core::DomainError("lens element " + std::to_string(i) + ": z_center not finite");
    if (i > 0 && !(elements[i].z_center > elements[i - 1].z_center))
      throw core::DomainError("lens elements must be sorted by strictly increasing z_center");
  }
  for (const auto& ap : apertures)
    if (!(ap.radius > 0.0) || !std::isfinite(ap.z))
      throw core::DomainError("aperture needs a finite z and positive radius");
  if (!std::isfinite(object_z) || !std::isfinite(image_z))
    throw core::DomainError("object_z and image_z must be finite");
}

ColumnFieldSample column_field(const OpticalColumn& column, double z)
{
  ColumnFieldSample out;
  for (const auto& el : column.elements)
  {
    const double local = z - el.z_center;
    if (local < el.model.support_min() || local > el.model.support_max())
      continue;
    const auto s = fields::eval_axial_field(el.model, local);
    const double b = el.model.b();
    out.b1 += s.b1;
    out.b3_over_b2 += s.b3 / (b * b);
  }
  return out;
}

std::string describe(const OpticalColumn& column)
{
  static const char* names[] = {"glaser", "wire_loop", "tabulated"};
  std::ostringstream out;
  out << column.elements.size() << " lens(es)";
  for (const auto& el : column.elements)
  {
    const auto& m = el.model;
    out << "; " << names[static_cast<int>(m.kind())] << " z=" << el.z_center
        << " B0=" << m.b0() << " extent=" << m.longitudinal_extent() << " b=" << m.b()
        << " pol=" << (m.polarity() > 0 ? "+" : "-");
  }
  if (!column.apertures.empty())
    out << "; " << column.apertures.size() << " aperture(s)";
  return out.str();
}

FocalLength focal_length(const fields::FieldIntegrals& integrals, double b,
                         const core::BeamParameters& beam, int m)
{
  const double e = PhysicalConstants::e_charge;
  const double denom =
      integrals.b1_squared - (m * PhysicalConstants::hbar / (e * b * b)) * integrals.b3;
  if (denom == 0.0)
    return {std::numeric_limits<double>::infinity(), FocalKind::Infinite};
  const double f = 4.0 * beam.momentum_squared() / (e * e * denom);
  return {f, f > 0.0 ? FocalKind::Converging : FocalKind::Diverging};
}

FocalLength focal_length(const fields::AxialFieldModel& model, const core::BeamParameters& beam,
                         int m)
{
  return focal_length(fields::field_integrals(model), model.b(), beam, m);
}

DispersionSummary dispersion_summary(const fields::AxialFieldModel& model,
                                     const core::BeamParameters& beam)
{
  const auto integrals = fields::field_integrals(model);
  if (integrals.b1_squared == 0.0)
    throw core::DomainError("degenerate lens: integral of B1^2 is zero");
  const double b = model.b();
  const double hbar = PhysicalConstants::hbar, e = PhysicalConstants::e_charge;
  DispersionSummary out;
  out.f0 = focal_length(integrals, b, beam, 0).value;
  out.lambda = (hbar / (e * b * b)) * integrals.b3 / integrals.b1_squared;
  out.beta0 = out.lambda * e * model.b0() * b * b / hbar;
  return out;
}

double approx_focal_length(double f0, double lambda, int m)
{
  return f0 * (1.0 + lambda * m);
}

double approx_focal_length_flux(double f0, double beta1, double n_flux, int m)
{
  if (n_flux == 0.0)
    throw core::DomainError("flux quantum count must be nonzero");
  return approx_focal_length(f0, beta1 / n_flux, m);
}

double larmor_phase(const fields::AxialFieldModel& model, const core::BeamParameters& beam,
                    int m)
{
  if (m == 0)
    return 0.0;
  const auto integrals = fields::field_integrals(model);
  const double p = std::sqrt(beam.momentum_squared());
  return -m * PhysicalConstants::e_charge * integrals.b1 / (2.0 * p);
}

double spherical_c3(const fields::AxialFieldModel& model, const core::BeamParameters& beam,
                    double f)
{
  if (!(f > 0.0))
    throw core::DomainError("spherical_c3: focal length must be positive");
  const auto integrals = fields::field_integrals(model);
  const double e = PhysicalConstants::e_charge, b = model.b();
  const double f2 = f * f;
  return e * e * f2 * f2 * integrals.b1_b3 / (4.0 * beam.momentum_squared() * b * b);
}

} // namespace oamlens::analytic

#include "oamlens/analytic.hpp"

#include "oamlens/errors.hpp"

#include <cmath>
#include <limits>

namespace oamlens::analytic
{

AfocalMagnification afocal_stack_magnification(double lambda, int m, int n_pairs)
{
  if (n_pairs < 0)
    throw core::DomainError("pair count must be non-negative");
  const double x = lambda * m;
  AfocalMagnification out;
  out.per_pair_exact = -(1.0 + x) / (1.0 - x);
  out.per_pair_linear = -(1.0 + 2.0 * x);
  out.exact = std::pow(out.per_pair_exact, n_pairs);
  const double sign = n_pairs % 2 == 0 ? 1.0 : -1.0;
  out.approx = sign * std::exp(2.0 * x * n_pairs);
  return out;
}

RayTransferMatrix afocal_pair_matrix(double f0, double lambda, int m)
{
  const double x = lambda * m;
  return thin_lens_matrix(f0 * (1.0 + x)) * drift_matrix(2.0 * f0) *
         thin_lens_matrix(f0 * (1.0 - x));
}

RayTransferMatrix afocal_stack_matrix(double f0, double lambda, int m, int n_pairs)
{
  const RayTransferMatrix pair = afocal_pair_matrix(f0, lambda, m);
  RayTransferMatrix total;
  for (int i = 0; i < n_pairs; ++i)
    total = pair * total;
  return total;
}

VariableSpacingMagnification variable_spacing_magnification(double lambda, int m, double s)
{
  if (!(s > 0.0))
    throw core::DomainError("spacing parameter s must be positive");
  const double denom = 1.0 - 2.0 * (s + 1.0) * lambda * m;
  if (std::abs(denom) <= 1e-14)
    return {std::copysign(std::numeric_limits<double>::infinity(), denom), true};
  return {1.0 / denom, false};
}

VariableSpacingDevice variable_spacing_device(double f0, double lambda, int m, double s)
{
  if (!(s > 0.0))
    throw core::DomainError("spacing parameter s must be positive");
  const double x = lambda * m;
  VariableSpacingDevice out;
  out.object_distance = (s + 1.0) * f0 / s;
  out.separation = 2.0 * (s + 1.0) * f0;
  out.system = thin_lens_matrix(f0 * (1.0 - x)) * drift_matrix(out.separation) *
               thin_lens_matrix(f0 * (1.0 + x));
  return out;
}

OpticalColumn alternating_stack(const fields::AxialFieldModel& model, int n_lenses,
                                double first_center, double spacing, int first_polarity)
{
  if (n_lenses < 1 || !(spacing > 0.0))
    throw core::DomainError("stack needs at least one lens and positive spacing");
  OpticalColumn column;
  int pol = first_polarity;
  for (int i = 0; i < n_lenses; ++i)
  {
    column.elements.push_back({model.with_polarity(pol), first_center + i * spacing});
    pol = -pol;
  }
  column.object_z = first_center - spacing;
  column.image_z = column.elements.back().z_center + spacing;
  return column;
}

} // namespace oamlens::analytic

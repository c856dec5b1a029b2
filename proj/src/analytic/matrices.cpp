#include "oamlens/analytic.hpp"

#include "oamlens/errors.hpp"

#include <cmath>
#include <limits>

namespace oamlens::analytic
{

RayTransferMatrix operator*(const RayTransferMatrix& l, const RayTransferMatrix& r)
{
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
          l.c * r.b + l.d * r.d};
}

RayTransferMatrix thin_lens_matrix(double f)
{
  if (f == 0.0 || std::isnan(f))
    throw core::DomainError("thin lens focal length must be nonzero");
  return {1.0, 0.0, -1.0 / f, 1.0};
}

RayTransferMatrix drift_matrix(double d)
{
  return {1.0, d, 0.0, 1.0};
}

RayTransferMatrix compose(std::span<const RayTransferMatrix> in_order)
{
  RayTransferMatrix total;
  for (const auto& m : in_order)
    total = m * total;
  return total;
}

ColumnMatrix column_matrix(const OpticalColumn& column, const core::BeamParameters& beam, int m)
{
  column.validate();
  ColumnMatrix out;
  double z = column.object_z;
  for (std::size_t i = 0; i < column.elements.size(); ++i)
  {
    const auto& el = column.elements[i];
    const FocalLength f = focal_length(el.model, beam, m);
    out.focal_lengths.push_back(f);
    const bool thin = std::abs(f.value) > 10.0 * el.model.longitudinal_extent();
    out.thin_lens_valid.push_back(thin);
    if (!thin)
      out.warnings.push_back("element " + std::to_string(i) + ": |f| = " +
                             std::to_string(std::abs(f.value)) +
                             " m is within 10 field extents; thin-lens result is approximate");
    out.matrix = thin_lens_matrix(f.value) * (drift_matrix(el.z_center - z) * out.matrix);
    z = el.z_center;
  }
  out.matrix = drift_matrix(column.image_z - z) * out.matrix;
  return out;
}

ImageSolution image_solve(const RayTransferMatrix& system, double object_distance)
{
  const RayTransferMatrix t = system * drift_matrix(object_distance);
  ImageSolution out;
  out.angular_magnification = system.d;
  const double scale = std::max({1.0, std::abs(system.c * object_distance), std::abs(system.d)});
  if (std::abs(t.d) <= 1e-12 * scale)
  {
    out.kind = ImageKind::AtInfinity;
    out.image_distance = std::numeric_limits<double>::infinity();
    out.magnification = std::numeric_limits<double>::infinity();
    return out;
  }
  out.image_distance = -t.b / t.d;
  out.magnification = t.a + out.image_distance * t.c;
  return out;
}

} // namespace oamlens::analytic

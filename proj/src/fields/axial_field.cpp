#include "oamlens/fields.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"
#include "oamlens/quadrature.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace oamlens::fields
{
namespace
{

void check_polarity(int polarity)
{
  if (polarity != 1 && polarity != -1)
    throw core::DomainError("polarity must be +1 or -1");
}

void check_positive(double value, const char* name)
{
  if (!(value > 0.0) || !std::isfinite(value))
    throw core::DomainError(std::string(name) + " must be positive and finite");
}

} // namespace

AxialFieldModel AxialFieldModel::glaser(double b0, double a, double b, int polarity)
{
  check_positive(b0, "Glaser B0");
  check_positive(a, "Glaser a");
  check_positive(b, "dispersion length b");
  check_polarity(polarity);
  AxialFieldModel model;
  model.kind_ = FieldKind::Glaser;
  model.b0_ = b0;
  model.a_ = a;
  model.b_ = b;
  model.polarity_ = polarity;
  return model;
}

AxialFieldModel AxialFieldModel::wire_loop_from_b0(double b0, double radius, int polarity)
{
  check_positive(b0, "wire loop B0");
  check_positive(radius, "wire loop R");
  check_polarity(polarity);
  AxialFieldModel model;
  model.kind_ = FieldKind::WireLoop;
  model.b0_ = b0;
  model.radius_ = radius;
  model.b_ = radius;
  model.polarity_ = polarity;
  return model;
}

AxialFieldModel AxialFieldModel::wire_loop_from_current(double current, double radius,
                                                        int polarity)
{
  check_positive(current, "wire loop current");
  check_positive(radius, "wire loop R");
  return wire_loop_from_b0(core::PhysicalConstants::mu0 * current / radius, radius, polarity);
}

AxialFieldModel AxialFieldModel::tabulated(std::vector<double> z, std::vector<double> b1,
                                           std::vector<double> b3, double b, int polarity,
                                           double b0)
{
  check_positive(b, "dispersion length b");
  check_polarity(polarity);
  if (z.size() < 2)
    throw core::DomainError("tabulated field needs at least two samples");
  if (b1.size() != z.size() || b3.size() != z.size())
    throw core::DomainError("tabulated field: z, B1 and B3 must have the same length");
  for (std::size_t i = 0; i < z.size(); ++i)
  {
    if (!std::isfinite(z[i]) || !std::isfinite(b1[i]) || !std::isfinite(b3[i]))
      throw core::DomainError("tabulated field: non-finite sample");
    if (i > 0 && !(z[i] > z[i - 1]))
      throw core::DomainError("tabulated field: z samples must be strictly increasing");
  }
  if (b0 == 0.0)
    for (double v : b1)
      b0 = std::max(b0, std::abs(v));
  check_positive(b0, "tabulated B0 (peak |B1|)");

  AxialFieldModel model;
  model.kind_ = FieldKind::Tabulated;
  model.b0_ = b0;
  model.b_ = b;
  model.polarity_ = polarity;
  model.z_ = std::move(z);
  model.b1_ = std::move(b1);
  model.b3_ = std::move(b3);
  return model;
}

AxialFieldModel AxialFieldModel::with_polarity(int polarity) const
{
  check_polarity(polarity);
  AxialFieldModel copy = *this;
  copy.polarity_ = polarity;
  return copy;
}

double AxialFieldModel::longitudinal_extent() const noexcept
{
  switch (kind_)
  {
  case FieldKind::Glaser:
    return a_;
  case FieldKind::WireLoop:
    return radius_;
  case FieldKind::Tabulated:
    return 0.5 * (z_.back() - z_.front());
  }
  return 0.0;
}

double AxialFieldModel::support_min() const noexcept
{
  return kind_ == FieldKind::Tabulated ? z_.front()
                                       : -std::numeric_limits<double>::infinity();
}

double AxialFieldModel::support_max() const noexcept
{
  return kind_ == FieldKind::Tabulated ? z_.back() : std::numeric_limits<double>::infinity();
}

AxialSample eval_axial_field(const AxialFieldModel& model, double z)
{
  const double sign = model.polarity();
  switch (model.kind())
  {
  case FieldKind::Glaser:
  {
    const double u = z / model.a();
    const double bg = sign * model.b0() / (1.0 + u * u);
    return {bg, bg};
  }
  case FieldKind::WireLoop:
  {
    const double r = model.radius();
    const double q = r * r / (z * z + r * r); // (R / l)^2
    const double q_half = std::sqrt(q);      // R / l
    const double q3 = q * q_half;            // (R / l)^3
    const double q5 = q3 * q;
    const double q7 = q5 * q;
    return {sign * model.b0() * q3 / 2.0, sign * 3.0 * model.b0() * (q5 + 2.5 * q7)};
  }
  case FieldKind::Tabulated:
  {
    const auto& zs = model.z_samples();
    if (!(z >= zs.front() && z <= zs.back()))
      throw core::DomainError("eval_axial_field: z = " + std::to_string(z) +
                              " outside tabulated range");
    auto it = std::upper_bound(zs.begin(), zs.end(), z);
    std::size_t hi = static_cast<std::size_t>(it - zs.begin());
    if (hi >= zs.size())
      hi = zs.size() - 1;
    const std::size_t lo = hi - 1;
    const double t = (z - zs[lo]) / (zs[hi] - zs[lo]);
    const auto& b1 = model.b1_samples();
    const auto& b3 = model.b3_samples();
    return {sign * (b1[lo] + t * (b1[hi] - b1[lo])), sign * (b3[lo] + t * (b3[hi] - b3[lo]))};
  }
  }
  return {};
}

VectorPotential vector_potential_phi(const AxialFieldModel& model, double rho, double z)
{
  if (!(rho >= 0.0))
    throw core::DomainError("vector_potential_phi: rho must be non-negative");
  const AxialSample s = eval_axial_field(model, z);
  const double b = model.b();
  VectorPotential out;
  out.a_phi = s.b1 * rho / 2.0 - s.b3 * rho * rho * rho / (8.0 * b * b);
  out.beyond_dispersion_length = rho > b;
  return out;
}

FieldIntegrals field_integrals(const AxialFieldModel& model, IntegralPath path)
{
  FieldIntegrals out;
  const double sign = model.polarity();
  const bool closed_form = path == IntegralPath::Preferred;

  if (closed_form && model.kind() == FieldKind::Glaser)
  {
    const double b0 = model.b0(), a = model.a();
    out.b1_squared = core::pi * b0 * b0 * a / 2.0;
    out.b1_b3 = out.b1_squared;
    out.b1 = sign * core::pi * b0 * a;
    out.b3 = out.b1;
    return out;
  }

  core::QuadratureOptions options;
  options.rel_tol = 1e-9;

  auto integrate = [&](auto integrand) {
    if (model.kind() == FieldKind::Tabulated)
    {
      // Piecewise-polynomial integrand: integrate each sample interval.
      const auto& zs = model.z_samples();
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < zs.size(); ++i)
      {
        core::QuadratureOptions seg = options;
        seg.abs_tol = 1e-300;
        total += core::integrate_line(integrand, zs[i], zs[i + 1], seg).value;
      }
      return total;
    }
    options.scale = model.longitudinal_extent();
    return core::integrate_line(integrand, -std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity(), options)
        .value;
  };

  out.b1_squared = integrate([&](double z) {
    const double b1 = eval_axial_field(model, z).b1;
    return b1 * b1;
  });
  out.b1 = integrate([&](double z) { return eval_axial_field(model, z).b1; });
  out.b1_b3 = integrate([&](double z) {
    const AxialSample s = eval_axial_field(model, z);
    return s.b1 * s.b3;
  });
  if (closed_form && model.kind() == FieldKind::WireLoop)
    out.b3 = sign * 12.0 * model.b0() * model.radius();
  else
    out.b3 = integrate([&](double z) { return eval_axial_field(model, z).b3; });
  return out;
}

AxialFieldModel load_tabulated_csv(const std::filesystem::path& path, double b, int polarity,
                                   double b0)
{
  std::ifstream in(path);
  if (!in)
    throw core::ConfigError("cannot open field table " + path.string());

  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    return s;
  };

  std::string line;
  if (!std::getline(in, line) || strip(line) != "z,B1,B3")
    throw core::ConfigError(path.string() + ": expected header 'z,B1,B3'");

  std::vector<double> z, b1, b3;
  int line_no = 1;
  while (std::getline(in, line))
  {
    ++line_no;
    line = strip(line);
    if (line.empty())
      continue;
    std::stringstream ss(line);
    std::string cell;
    double values[3];
    int count = 0;
    while (std::getline(ss, cell, ','))
    {
      if (count == 3)
      {
        count = 4;
        break;
      }
      try
      {
        std::size_t used = 0;
        values[count] = std::stod(cell, &used);
        if (used != cell.size())
          throw std::invalid_argument(cell);
      }
      catch (const std::exception&)
      {
        throw core::ConfigError(path.string() + ":" + std::to_string(line_no) +
                                ": not a number: '" + cell + "'");
      }
      ++count;
    }
    if (count != 3)
      throw core::ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected three columns");
    z.push_back(values[0]);
    b1.push_back(values[1]);
    b3.push_back(values[2]);
  }
  try
  {
    return AxialFieldModel::tabulated(std::move(z), std::move(b1), std::move(b3), b, polarity,
                                      b0);
  }
  catch (const core::DomainError& err)
  {
    throw core::ConfigError(path.string() + ": " + err.what());
  }
}

} // namespace oamlens::fields

#include "oamlens/wave.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oamlens::wave
{

void RadialGrid::validate() const
{
  if (size < 4)
    throw core::ConfigError("radial grid needs at least 4 points");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw core::ConfigError("radial grid spacing must be positive");
}

double AzimuthalWave::component_power(int m) const
{
  const auto it = components.find(m);
  if (it == components.end())
    return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size; ++j)
    acc += std::norm(it->second[j]) * grid.rho(j);
  return 2.0 * core::pi * grid.spacing * acc;
}

double AzimuthalWave::norm() const
{
  double total = 0.0;
  for (const auto& [m, u] : components)
    total += component_power(m);
  return total;
}

double AzimuthalWave::mean_square_radius(int m) const
{
  const auto it = components.find(m);
  if (it == components.end())
    throw core::DomainError("wave has no component m = " + std::to_string(m));
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < grid.size; ++j)
  {
    const double r = grid.rho(j);
    const double p = std::norm(it->second[j]) * r;
    num += p * r * r;
    den += p;
  }
  if (den == 0.0)
    throw core::DomainError("component m = " + std::to_string(m) + " carries no power");
  return num / den;
}

AzimuthalWave lg_mode(const std::vector<LGModeSpec>& specs, const RadialGrid& grid,
                      const core::BeamParameters& beam, double z)
{
  grid.validate();
  if (specs.empty())
    throw core::ConfigError("source needs at least one LG mode");

  AzimuthalWave wave;
  wave.grid = grid;
  wave.z = z;
  wave.beam = beam;
  for (const auto& spec : specs)
  {
    if (!(spec.w0 > 0.0))
      throw core::ConfigError("LG mode m = " + std::to_string(spec.m) + ": w0 must be positive");
    const double dr_max = spec.w0 / 16.0;
    if (grid.spacing > dr_max)
    {
      std::ostringstream msg;
      msg << "radial grid too coarse for LG mode m = " << spec.m << ": d_rho = " << grid.spacing
          << " m exceeds w0/16 = " << dr_max << " m";
      throw core::ConfigError(msg.str());
    }
    const double rho_min = 4.0 * spec.w0 * std::sqrt(std::abs(spec.m) / 2.0 + 1.0);
    if (grid.extent() < rho_min)
    {
      std::ostringstream msg;
      msg << "radial grid too small for LG mode m = " << spec.m << ": rho_max = "
          << grid.extent() << " m is below 4 w0 sqrt(|m|/2 + 1) = " << rho_min << " m";
      throw core::ConfigError(msg.str());
    }

    // Shape (rho sqrt2 / w0)^|m| exp(-rho^2 / w0^2), normalised on the grid.
    std::vector<Complex> u(grid.size);
    const int am = std::abs(spec.m);
    double power = 0.0;
    for (std::size_t j = 0; j < grid.size; ++j)
    {
      const double x = grid.rho(j) / spec.w0;
      // log form avoids overflow of x^|m| for large m
      const double v = x > 0.0 ? std::exp(am * std::log(x * std::sqrt(2.0)) - x * x) : 0.0;
      u[j] = v;
      power += v * v * grid.rho(j);
    }
    power *= 2.0 * core::pi * grid.spacing;
    const Complex scale = spec.amplitude / std::sqrt(power);
    auto& target = wave.components[spec.m];
    target.resize(grid.size);
    for (std::size_t j = 0; j < grid.size; ++j)
      target[j] += scale * u[j];
  }
  const double total = wave.norm();
  if (!(total > 0.0))
    throw core::ConfigError("LG superposition has zero total power");
  const double s = 1.0 / std::sqrt(total);
  for (auto& [m, u] : wave.components)
    for (auto& v : u)
      v *= s;
  return wave;
}

OAMSpectrum oam_spectrum(const AzimuthalWave& wave)
{
  OAMSpectrum out;
  double total = 0.0;
  for (const auto& [m, u] : wave.components)
    total += out[m] = wave.component_power(m);
  if (!(total > 0.0))
    throw core::DomainError("oam_spectrum: wave carries no power");
  for (auto& [m, p] : out)
    p /= total;
  return out;
}

std::optional<double> waist_position(const std::vector<Snapshot>& snapshots, int m)
{
  const std::size_t n = snapshots.size();
  if (n < 3)
    return std::nullopt;
  std::vector<double> ms(n);
  for (std::size_t i = 0; i < n; ++i)
    ms[i] = snapshots[i].wave.mean_square_radius(m);
  const std::size_t imin =
      static_cast<std::size_t>(std::min_element(ms.begin(), ms.end()) - ms.begin());
  const std::size_t mid = std::clamp<std::size_t>(imin, 1, n - 2);

  const double zc = snapshots[mid].z;
  const double u0 = snapshots[mid - 1].z - zc, u2 = snapshots[mid + 1].z - zc;
  const double v0 = ms[mid - 1] - ms[mid], v2 = ms[mid + 1] - ms[mid];
  const double a = (v0 / u0 - v2 / u2) / (u0 - u2);
  const double b = v0 / u0 - a * u0;
  if (!(a > 0.0))
    return std::nullopt;
  const double z = zc - b / (2.0 * a);
  const double lo = snapshots.front().z - 0.5 * (snapshots[1].z - snapshots[0].z);
  const double hi = snapshots.back().z + 0.5 * (snapshots[n - 1].z - snapshots[n - 2].z);
  if (z < lo || z > hi)
    return std::nullopt;
  return z;
}

ApertureResult aperture_transmission(const AzimuthalWave& wave, double radius)
{
  if (!(radius > 0.0))
    throw core::DomainError("aperture radius must be positive");
  ApertureResult out;
  out.transmitted = wave;
  const double dr = wave.grid.spacing;
  std::vector<double> frac(wave.grid.size);
  for (std::size_t j = 0; j < wave.grid.size; ++j)
  {
    const double inner = j * dr, outer = (j + 1) * dr;
    frac[j] = std::clamp((radius * radius - inner * inner) / (outer * outer - inner * inner), 0.0,
                         1.0);
  }
  for (auto& [m, u] : out.transmitted.components)
  {
    double inside = 0.0, total = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
    {
      const double p = std::norm(u[j]) * wave.grid.rho(j);
      total += p;
      inside += frac[j] * p;
      u[j] *= std::sqrt(frac[j]);
    }
    out.transmission[m] = total > 0.0 ? inside / total : 0.0;
  }
  out.transmitted_power = out.transmitted.norm();
  return out;
}

} // namespace oamlens::wave

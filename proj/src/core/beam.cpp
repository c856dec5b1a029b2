#include "oamlens/beam.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"

#include <cmath>
#include <string>

namespace oamlens::core
{

double BeamParameters::momentum_squared() const noexcept
{
  if (kinematics == Kinematics::NonRelativistic)
    return 2.0 * PhysicalConstants::m_e * kinetic_energy;
  return momentum * momentum;
}

BeamParameters make_beam(double accelerating_voltage, Kinematics kinematics)
{
  if (!(accelerating_voltage > 0.0) || !std::isfinite(accelerating_voltage))
    throw DomainError("make_beam: accelerating voltage must be positive and finite, got " +
                      std::to_string(accelerating_voltage));

  using C = PhysicalConstants;
  BeamParameters beam;
  beam.kinematics = kinematics;
  beam.accelerating_voltage = accelerating_voltage;
  beam.kinetic_energy = C::e_charge * accelerating_voltage;

  double p2 = 2.0 * C::m_e * beam.kinetic_energy;
  double gamma = 1.0;
  if (kinematics == Kinematics::Relativistic)
  {
    const double rest = C::m_e * C::c_light * C::c_light;
    p2 *= 1.0 + beam.kinetic_energy / (2.0 * rest);
    gamma = 1.0 + beam.kinetic_energy / rest;
  }
  beam.momentum = std::sqrt(p2);
  beam.wavelength = C::h / beam.momentum;
  beam.wavenumber = 2.0 * pi / beam.wavelength;
  beam.speed = C::hbar * beam.wavenumber / (gamma * C::m_e);
  return beam;
}

} // namespace oamlens::core

#pragma once

namespace oamlens::core
{

enum class Kinematics
{
  NonRelativistic,
  /// Extension: relativistic wavelength and mass correction. Not used by
  /// any of the thin-lens formulas' reference values.
  Relativistic,
};

struct BeamParameters
{
  double accelerating_voltage = 0.0; // V
  double kinetic_energy = 0.0;       // J, e * Va
  double wavelength = 0.0;           // m
  double wavenumber = 0.0;           // 1/m
  double speed = 0.0;                // m/s
  double momentum = 0.0;             // kg m/s, hbar * k
  Kinematics kinematics = Kinematics::NonRelativistic;

  /// Squared momentum. Equals 2 m_e E exactly in the non-relativistic case,
  /// which keeps 8 m_e E / e^2 style prefactors bit-identical to their
  /// textbook form.
  double momentum_squared() const noexcept;
};

/// Electron beam accelerated through `accelerating_voltage` volts.
/// Throws DomainError for non-positive or non-finite voltage.
BeamParameters make_beam(double accelerating_voltage,
                         Kinematics kinematics = Kinematics::NonRelativistic);

} // namespace oamlens::core

#pragma once

#include <cstdint>
#include <numbers>

namespace oamlens::core
{

/// CODATA-2018 values in SI units. Pinned so that every numeric output is
/// reproducible bit for bit.
struct PhysicalConstants
{
  static constexpr double hbar = 1.054571817e-34;     // J s
  static constexpr double h = 6.62607015e-34;         // J s
  static constexpr double e_charge = 1.602176634e-19; // C, magnitude
  static constexpr double m_e = 9.1093837015e-31;     // kg
  static constexpr double mu0 = 1.25663706212e-6;     // T m / A
  static constexpr double c_light = 299792458.0;      // m / s
};

inline constexpr double pi = std::numbers::pi;

/// FNV-1a hash over the bit patterns of the pinned constants. Written into
/// run reports so that results produced with different constants are
/// distinguishable.
std::uint64_t constants_hash() noexcept;

} // namespace oamlens::core

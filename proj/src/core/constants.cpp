#include "oamlens/constants.hpp"

#include <bit>

namespace oamlens::core
{

std::uint64_t constants_hash() noexcept
{
  constexpr double values[] = {
      PhysicalConstants::hbar, PhysicalConstants::h,   PhysicalConstants::e_charge,
      PhysicalConstants::m_e,  PhysicalConstants::mu0, PhysicalConstants::c_light,
  };
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (double v : values)
  {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte)
    {
      hash ^= (bits >> (8 * byte)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

} // namespace oamlens::core

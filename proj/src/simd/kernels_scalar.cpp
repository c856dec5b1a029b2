#include "oamlens/simd.hpp"

#include "kernels_internal.hpp"

#include <cstdlib>
#include <cstring>

namespace oamlens::simd
{
namespace
{

double weighted_power(const Complex* u, const double* w, std::size_t n)
{
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    acc += w[j] * (u[j].real() * u[j].real() + u[j].imag() * u[j].imag());
  return acc;
}

void multiply(Complex* u, const Complex* p, std::size_t n)
{
  for (std::size_t j = 0; j < n; ++j)
  {
    const double re = u[j].real() * p[j].real() - u[j].imag() * p[j].imag();
    const double im = u[j].imag() * p[j].real() + u[j].real() * p[j].imag();
    u[j] = {re, im};
  }
}

void tridiagonal_apply(const Complex* u, const double* d, const double* lo, const double* di,
                       const double* up, Complex* out, std::size_t n)
{
  for (std::size_t j = 0; j < n; ++j)
  {
    Complex t = di[j] * u[j];
    if (j > 0)
      t += lo[j] * u[j - 1];
    if (j + 1 < n)
      t += up[j] * u[j + 1];
    out[j] = {d[j] * u[j].real() - t.imag(), d[j] * u[j].imag() + t.real()};
  }
}

const Kernels scalar{Isa::Scalar, weighted_power, multiply, tridiagonal_apply};

} // namespace

const char* isa_name(Isa isa) noexcept
{
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

const Kernels& scalar_kernels() noexcept
{
  return scalar;
}

const Kernels* avx2_kernels() noexcept
{
#if defined(OAMLENS_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active_kernels() noexcept
{
  static const Kernels& chosen = [] () -> const Kernels& {
    const char* env = std::getenv("OAMLENS_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0)
      return scalar;
    const Kernels* fast = avx2_kernels();
    return fast != nullptr ? *fast : scalar;
  }();
  return chosen;
}

} // namespace oamlens::simd

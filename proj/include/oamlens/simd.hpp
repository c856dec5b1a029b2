#pragma once

#include <complex>
#include <cstddef>

namespace oamlens::simd
{

using Complex = std::complex<double>;

enum class Isa
{
  Scalar,
  Avx2,
};

const char* isa_name(Isa isa) noexcept;

/// Data-parallel loops of the radial propagator. Every ISA variant computes
/// the same arithmetic as the scalar reference up to rounding.
struct Kernels
{
  Isa isa;
  /// sum_j w_j |u_j|^2
  double (*weighted_power)(const Complex* u, const double* w, std::size_t n);
  /// u_j *= p_j
  void (*multiply)(Complex* u, const Complex* p, std::size_t n);
  /// out_j = d_j u_j + i (lo_j u_{j-1} + di_j u_j + up_j u_{j+1}), with
  /// u_{-1} = u_n = 0. All coefficient arrays are real.
  void (*tridiagonal_apply)(const Complex* u, const double* d, const double* lo,
                            const double* di, const double* up, Complex* out, std::size_t n);
};

const Kernels& scalar_kernels() noexcept;
/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2/FMA.
const Kernels* avx2_kernels() noexcept;

/// Best supported variant, chosen once. Setting OAMLENS_SIMD=scalar in the
/// environment forces the scalar reference.
const Kernels& active_kernels() noexcept;

} // namespace oamlens::simd

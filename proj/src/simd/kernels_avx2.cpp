// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include "kernels_internal.hpp"

#include <immintrin.h>

namespace oamlens::simd
{
namespace
{

// [w0, w0, w1, w1] from two consecutive reals.
inline __m256d dup_pair(const double* w)
{
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w)), 0x50);
}

double weighted_power(const Complex* u, const double* w, std::size_t n)
{
  const double* p = reinterpret_cast<const double*>(u);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
  {
    const __m256d a = _mm256_loadu_pd(p + 2 * j);
    const __m256d b = _mm256_loadu_pd(p + 2 * j + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(a, a), dup_pair(w + j), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(b, b), dup_pair(w + j + 2), acc1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j)
    acc += w[j] * (u[j].real() * u[j].real() + u[j].imag() * u[j].imag());
  return acc;
}

inline __m256d cmul(__m256d a, __m256d b)
{
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

void multiply(Complex* u, const Complex* p, std::size_t n)
{
  double* up = reinterpret_cast<double*>(u);
  const double* pp = reinterpret_cast<const double*>(p);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2)
    _mm256_storeu_pd(up + 2 * j, cmul(_mm256_loadu_pd(up + 2 * j), _mm256_loadu_pd(pp + 2 * j)));
  for (; j < n; ++j)
  {
    const double re = u[j].real() * p[j].real() - u[j].imag() * p[j].imag();
    const double im = u[j].imag() * p[j].real() + u[j].real() * p[j].imag();
    u[j] = {re, im};
  }
}

void tridiagonal_edge(const Complex* u, const double* d, const double* lo, const double* di,
                      const double* up, Complex* out, std::size_t n, std::size_t j)
{
  Complex t = di[j] * u[j];
  if (j > 0)
    t += lo[j] * u[j - 1];
  if (j + 1 < n)
    t += up[j] * u[j + 1];
  out[j] = {d[j] * u[j].real() - t.imag(), d[j] * u[j].imag() + t.real()};
}

void tridiagonal_apply(const Complex* u, const double* d, const double* lo, const double* di,
                       const double* up, Complex* out, std::size_t n)
{
  if (n < 4)
  {
    for (std::size_t j = 0; j < n; ++j)
      tridiagonal_edge(u, d, lo, di, up, out, n, j);
    return;
  }
  const double* p = reinterpret_cast<const double*>(u);
  double* o = reinterpret_cast<double*>(out);
  tridiagonal_edge(u, d, lo, di, up, out, n, 0);
  std::size_t j = 1;
  for (; j + 2 < n; j += 2)
  {
    const __m256d um = _mm256_loadu_pd(p + 2 * (j - 1));
    const __m256d u0 = _mm256_loadu_pd(p + 2 * j);
    const __m256d uq = _mm256_loadu_pd(p + 2 * (j + 1));
    __m256d t = _mm256_mul_pd(dup_pair(lo + j), um);
    t = _mm256_fmadd_pd(dup_pair(di + j), u0, t);
    t = _mm256_fmadd_pd(dup_pair(up + j), uq, t);
    const __m256d du = _mm256_mul_pd(dup_pair(d + j), u0);
    // d u + i t = (du_re - t_im, du_im + t_re)
    _mm256_storeu_pd(o + 2 * j, _mm256_addsub_pd(du, _mm256_permute_pd(t, 0x5)));
  }
  for (; j < n; ++j)
    tridiagonal_edge(u, d, lo, di, up, out, n, j);
}

const Kernels avx2{Isa::Avx2, weighted_power, multiply, tridiagonal_apply};

} // namespace

namespace detail
{
const Kernels& avx2_table() noexcept
{
  return avx2;
}
} // namespace detail

} // namespace oamlens::simd

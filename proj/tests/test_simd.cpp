#include "oamlens/simd.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace oamlens;
using simd::Complex;

namespace
{

struct Data
{
  std::vector<Complex> u, p;
  std::vector<double> w, lo, di, up;
};

Data make_data(std::size_t n, unsigned seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Data d;
  for (std::size_t j = 0; j < n; ++j)
  {
    d.u.emplace_back(dist(gen), dist(gen));
    d.p.emplace_back(dist(gen), dist(gen));
    d.w.push_back(std::abs(dist(gen)));
    d.lo.push_back(dist(gen));
    d.di.push_back(dist(gen));
    d.up.push_back(dist(gen));
  }
  return d;
}

} // namespace

TEST_CASE("scalar tridiagonal apply matches the definition")
{
  const auto& k = simd::scalar_kernels();
  const Data d = make_data(7, 1);
  std::vector<Complex> out(7);
  k.tridiagonal_apply(d.u.data(), d.w.data(), d.lo.data(), d.di.data(), d.up.data(), out.data(), 7);
  for (std::size_t j = 0; j < 7; ++j)
  {
    Complex t = d.di[j] * d.u[j];
    if (j > 0)
      t += d.lo[j] * d.u[j - 1];
    if (j + 1 < 7)
      t += d.up[j] * d.u[j + 1];
    const Complex expect = d.w[j] * d.u[j] + Complex(0.0, 1.0) * t;
    CHECK(std::abs(out[j] - expect) < 1e-15);
  }
}

TEST_CASE("scalar weighted power and multiply")
{
  const auto& k = simd::scalar_kernels();
  const Data d = make_data(5, 2);
  double expect = 0.0;
  for (std::size_t j = 0; j < 5; ++j)
    expect += d.w[j] * std::norm(d.u[j]);
  CHECK(k.weighted_power(d.u.data(), d.w.data(), 5) == doctest::Approx(expect).epsilon(1e-15));
  auto u = d.u;
  k.multiply(u.data(), d.p.data(), 5);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(std::abs(u[j] - d.u[j] * d.p[j]) < 1e-15);
}

TEST_CASE("AVX2 kernels agree with the scalar reference")
{
  const simd::Kernels* avx = simd::avx2_kernels();
  if (avx == nullptr)
  {
    MESSAGE("AVX2 variant not available on this build or CPU; skipped");
    return;
  }
  const auto& ref = simd::scalar_kernels();
  CHECK(avx->isa == simd::Isa::Avx2);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u, 4096u})
  {
    CAPTURE(n);
    const Data d = make_data(n, 100 + static_cast<unsigned>(n));

    const double pr = ref.weighted_power(d.u.data(), d.w.data(), n);
    const double pa = avx->weighted_power(d.u.data(), d.w.data(), n);
    CHECK(std::abs(pr - pa) <= 1e-14 * std::max(1.0, pr));

    auto ur = d.u, ua = d.u;
    ref.multiply(ur.data(), d.p.data(), n);
    avx->multiply(ua.data(), d.p.data(), n);
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(ur[j] - ua[j]) < 1e-15);

    std::vector<Complex> tr(n), ta(n);
    ref.tridiagonal_apply(d.u.data(), d.w.data(), d.lo.data(), d.di.data(), d.up.data(),
                          tr.data(), n);
    avx->tridiagonal_apply(d.u.data(), d.w.data(), d.lo.data(), d.di.data(), d.up.data(),
                           ta.data(), n);
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(tr[j] - ta[j]) < 1e-14);
  }
}

TEST_CASE("active kernels are one of the known variants")
{
  const auto& k = simd::active_kernels();
  CHECK((k.isa == simd::Isa::Scalar || k.isa == simd::Isa::Avx2));
  CHECK(std::string(simd::isa_name(k.isa)).size() > 0);
}

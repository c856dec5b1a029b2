#include "oamlens/tridiagonal.hpp"

#include "oamlens/errors.hpp"

namespace oamlens::core
{

TridiagonalFactor::TridiagonalFactor(std::span<const Complex> lower,
                                     std::span<const Complex> diag,
                                     std::span<const Complex> upper)
{
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n)
    throw DomainError("TridiagonalFactor: band sizes differ");

  lower_.assign(lower.begin(), lower.end());
  inv_pivot_.resize(n);
  upper_scaled_.resize(n);
  Complex prev_upper = 0.0;
  for (std::size_t j = 0; j < n; ++j)
  {
    const Complex pivot = j == 0 ? diag[0] : diag[j] - lower[j] * prev_upper;
    if (pivot == Complex(0.0))
      throw NumericalError("TridiagonalFactor: zero pivot");
    inv_pivot_[j] = 1.0 / pivot;
    upper_scaled_[j] = j + 1 < n ? upper[j] * inv_pivot_[j] : Complex(0.0);
    prev_upper = upper_scaled_[j];
  }
}

void TridiagonalFactor::solve_in_place(std::span<Complex> rhs) const
{
  const std::size_t n = inv_pivot_.size();
  if (rhs.size() != n)
    throw DomainError("TridiagonalFactor::solve_in_place: size mismatch");
  if (n == 0)
    return;

  rhs[0] *= inv_pivot_[0];
  for (std::size_t j = 1; j < n; ++j)
    rhs[j] = (rhs[j] - lower_[j] * rhs[j - 1]) * inv_pivot_[j];
  for (std::size_t j = n - 1; j-- > 0;)
    rhs[j] -= upper_scaled_[j] * rhs[j + 1];
}

std::vector<Complex> solve_tridiagonal(std::span<const Complex> lower,
                                       std::span<const Complex> diag,
                                       std::span<const Complex> upper,
                                       std::span<const Complex> rhs)
{
  TridiagonalFactor factor(lower, diag, upper);
  std::vector<Complex> x(rhs.begin(), rhs.end());
  factor.solve_in_place(x);
  return x;
}

} // namespace oamlens::core

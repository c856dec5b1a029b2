#pragma once

#include <complex>
#include <span>
#include <vector>

namespace oamlens::core
{

using Complex = std::complex<double>;

/// LU factorisation of a complex tridiagonal matrix for repeated Thomas
/// solves with the same matrix. No pivoting; intended for diagonally
/// dominant systems such as Crank-Nicolson left-hand sides.
class TridiagonalFactor
{
public:
  TridiagonalFactor() = default;

  /// lower[0] and upper[n-1] are ignored.
  TridiagonalFactor(std::span<const Complex> lower, std::span<const Complex> diag,
                    std::span<const Complex> upper);

  std::size_t size() const noexcept { return inv_pivot_.size(); }

  /// Solves A x = rhs in place.
  void solve_in_place(std::span<Complex> rhs) const;

private:
  std::vector<Complex> lower_;
  std::vector<Complex> inv_pivot_;
  std::vector<Complex> upper_scaled_;
};

/// One-shot convenience wrapper around TridiagonalFactor.
std::vector<Complex> solve_tridiagonal(std::span<const Complex> lower,
                                       std::span<const Complex> diag,
                                       std::span<const Complex> upper,
                                       std::span<const Complex> rhs);

} // namespace oamlens::core

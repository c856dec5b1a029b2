#pragma once

#include "oamlens/analytic.hpp"
#include "oamlens/beam.hpp"

#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace oamlens::wave
{

using Complex = std::complex<double>;

/// Cell-centred radial grid rho_j = (j + 1/2) d_rho, j = 0..size-1.
struct RadialGrid
{
  std::size_t size = 0;
  double spacing = 0.0; // m

  double rho(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * spacing; }
  double extent() const noexcept { return static_cast<double>(size) * spacing; }
  /// Throws ConfigError for an empty grid or non-positive spacing.
  void validate() const;
};

/// Paraxial wavefunction as a set of azimuthal orders. Value type.
struct AzimuthalWave
{
  RadialGrid grid;
  std::map<int, std::vector<Complex>> components;
  double z = 0.0;
  core::BeamParameters beam;

  /// sum_m sum_j |u_m(rho_j)|^2 2 pi rho_j d_rho
  double norm() const;
  double component_power(int m) const;
  /// <rho^2> of one component, normalised by its own power.
  double mean_square_radius(int m) const;
};

struct LGModeSpec
{
  int m = 0;
  double w0 = 0.0; // m
  Complex amplitude{1.0, 0.0};
};

/// p = 0 Laguerre-Gaussian superposition at its waist, normalised to unit
/// total power. Throws ConfigError when the grid violates d_rho <= w0/16 or
/// rho_max >= 4 w0 sqrt(|m|/2 + 1) for any mode, naming the bound.
AzimuthalWave lg_mode(const std::vector<LGModeSpec>& specs, const RadialGrid& grid,
                      const core::BeamParameters& beam, double z = 0.0);

/// Power fraction per m.
using OAMSpectrum = std::map<int, double>;

/// component_power(m) / norm(). Throws DomainError for a wave without power.
OAMSpectrum oam_spectrum(const AzimuthalWave& wave);

struct WaveOptions
{
  /// Largest step anywhere (m).
  double free_step = 1e-4;
  /// Steps inside +-lens_region_factor extents of a lens centre are at most
  /// extent / steps_per_extent.
  double steps_per_extent = 50.0;
  double lens_region_factor = 10.0;
  bool absorber = true;
  /// Fraction of the grid (outer edge) covered by the absorbing ramp.
  double absorber_fraction = 0.1;
  /// Peak absorption rate of the ramp (1/m). 0 picks 10 pi / (k d_rho L_ramp).
  double absorber_strength = 0.0;
  /// Worker threads for per-m propagation.
  unsigned threads = 1;
};

struct StepReport
{
  std::size_t substeps = 0;
  std::vector<std::string> warnings;
  /// Power removed by the absorbing ramp during the call.
  double absorbed = 0.0;
};

/// Advances every component by dz (> 0) with Strang splitting: half potential
/// phase, Crank-Nicolson radial diffraction, half potential phase. dz is
/// split into sub-steps so lens regions never see a step larger than the
/// local bound; a warning carrying the recommended dz is recorded when that
/// happens.
AzimuthalWave step(const AzimuthalWave& wave, double dz, const analytic::OpticalColumn& column,
                   const WaveOptions& options = {}, StepReport* report = nullptr);

/// Largest allowed step at z for the column (before rounding to the
/// power-of-two ladder used by propagate).
double step_bound(const analytic::OpticalColumn& column, double z, const WaveOptions& options);

struct Snapshot
{
  double z = 0.0;
  AzimuthalWave wave;
};

struct PropagationResult
{
  std::vector<Snapshot> snapshots;
  AzimuthalWave final_wave;
  std::size_t steps = 0;
  double absorbed = 0.0;
  std::vector<std::string> warnings;
};

/// Propagates to each sample plane (sorted, >= wave.z) and returns a copy of
/// the wave there. A plane equal to wave.z returns the input unchanged.
/// Components run on options.threads workers; results do not depend on the
/// thread count.
PropagationResult propagate(const AzimuthalWave& wave, const analytic::OpticalColumn& column,
                            const std::vector<double>& sample_planes,
                            const WaveOptions& options = {});

/// Potential phase picked up by component m between z0 and z1 on the
/// propagate step ladder. The applied factor is exp(i (larmor - quadratic rho^2));
/// larmor = -m e int B1 / (2 p) and quadratic = k / (2 f_m) for a thin lens.
struct PotentialPhase
{
  double larmor = 0.0;    // rad
  double quadratic = 0.0; // rad / m^2
};

PotentialPhase integrate_potential(const analytic::OpticalColumn& column,
                                   const core::BeamParameters& beam, int m, double z0, double z1,
                                   const WaveOptions& options = {});

/// Applies only the potential phase accumulated over [z0, z1] (thin-element
/// limit, no diffraction). Unimodular per cell, so the norm is unchanged.
AzimuthalWave apply_lens_slice(const AzimuthalWave& wave, const analytic::OpticalColumn& column,
                               double z0, double z1, const WaveOptions& options = {});

/// z of the minimum of <rho^2> for component m, from a parabola through the
/// smallest sample and its neighbours (the three end samples when the
/// minimum sits on an edge; the vertex may then lie up to half a spacing
/// outside the sampled range). std::nullopt when no minimum is bracketed.
std::optional<double> waist_position(const std::vector<Snapshot>& snapshots, int m);

struct ApertureResult
{
  /// Fraction of each component's power inside the aperture.
  std::map<int, double> transmission;
  /// Wave truncated at the aperture edge (not renormalised).
  AzimuthalWave transmitted;
  double transmitted_power = 0.0;
};

/// Hard-edged circular aperture. Cells straddling the edge are weighted by
/// the fraction of their annulus inside. Throws DomainError for radius <= 0.
ApertureResult aperture_transmission(const AzimuthalWave& wave, double radius);

/// Square N x N field, pixel centres at (i - N/2 + 1/2) pitch. Row-major with
/// y along rows.
struct CartesianField
{
  std::size_t n = 0;
  double pitch = 0.0;
  double z = 0.0;
  std::vector<Complex> values;

  Complex at(std::size_t row, std::size_t col) const { return values[row * n + col]; }
  double power() const;
};

/// psi(x, y) = sum_m u_m(rho) e^{i m phi}, u_m linearly interpolated. Throws
/// ConfigError for odd n or when the half-width exceeds the radial extent.
CartesianField synthesize_2d(const AzimuthalWave& wave, std::size_t n, double pitch);

/// Azimuthal Fourier decomposition of a Cartesian field on rings of radius
/// (r + 1/2) pitch. Returns power fractions for |m| <= m_max that sum to one
/// over that range.
OAMSpectrum decompose_azimuthal(const CartesianField& field, int m_max, std::size_t n_phi = 256);

/// 16-bit binary PGM of |psi|^2 scaled so the peak maps to 65535, plus a
/// sidecar JSON (same stem, .json). Returns the written paths.
std::vector<std::filesystem::path> write_intensity_pgm(const CartesianField& field,
                                                       const std::filesystem::path& path);
/// 16-bit binary PGM of arg(psi) mapped from [0, 2 pi) to [0, 65535], plus a
/// sidecar JSON.
std::vector<std::filesystem::path> write_phase_pgm(const CartesianField& field,
                                                   const std::filesystem::path& path);

/// `rho,re_u,im_u` for one component.
void write_profile_csv(std::ostream& out, const AzimuthalWave& wave, int m);
/// `m,power`
void write_spectrum_csv(std::ostream& out, const OAMSpectrum& spectrum);

} // namespace oamlens::wave

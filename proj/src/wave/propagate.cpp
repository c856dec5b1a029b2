#include "oamlens/wave.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"
#include "oamlens/simd.hpp"
#include "oamlens/tridiagonal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace oamlens::wave
{

namespace
{

using core::PhysicalConstants;

// Field integrals over one half-step: int B1, int B1^2, int B3 / b^2.
struct HalfIntegrals
{
  double b1 = 0.0;
  double b1_sq = 0.0;
  double b3 = 0.0;
  bool zero() const noexcept { return b1 == 0.0 && b1_sq == 0.0 && b3 == 0.0; }
};

HalfIntegrals gauss3(const analytic::OpticalColumn& column, double z0, double z1)
{
  static constexpr double node = 0.7745966692414834; // sqrt(3/5)
  static constexpr double w_side = 5.0 / 9.0, w_mid = 8.0 / 9.0;
  const double half = 0.5 * (z1 - z0), mid = 0.5 * (z0 + z1);
  HalfIntegrals out;
  const double zs[3] = {mid - node * half, mid, mid + node * half};
  const double ws[3] = {w_side, w_mid, w_side};
  for (int i = 0; i < 3; ++i)
  {
    const auto f = analytic::column_field(column, zs[i]);
    out.b1 += ws[i] * f.b1;
    out.b1_sq += ws[i] * f.b1 * f.b1;
    out.b3 += ws[i] * f.b3_over_b2;
  }
  out.b1 *= half;
  out.b1_sq *= half;
  out.b3 *= half;
  return out;
}

PotentialPhase phase_of(const HalfIntegrals& in, double p, int m)
{
  const double e = PhysicalConstants::e_charge, hbar = PhysicalConstants::hbar;
  PotentialPhase out;
  out.larmor = -m * e * in.b1 / (2.0 * p);
  out.quadratic = e * e / (8.0 * hbar * p) * (in.b1_sq - m * hbar / e * in.b3);
  return out;
}

double ladder_step(double free_step, double bound)
{
  if (bound >= free_step)
    return free_step;
  const int n = static_cast<int>(std::ceil(std::log2(free_step / bound)));
  double h = std::ldexp(free_step, -n);
  // guard against log2 rounding
  while (h > bound)
    h *= 0.5;
  return h;
}

void check_options(const WaveOptions& o)
{
  if (!(o.free_step > 0.0) || !std::isfinite(o.free_step))
    throw core::ConfigError("wave free_step must be positive");
  if (!(o.steps_per_extent > 0.0))
    throw core::ConfigError("wave steps_per_extent must be positive");
  if (!(o.lens_region_factor >= 0.0))
    throw core::ConfigError("wave lens_region_factor must be non-negative");
  if (!(o.absorber_fraction > 0.0 && o.absorber_fraction < 1.0))
    throw core::ConfigError("wave absorber_fraction must be in (0, 1)");
  if (!(o.absorber_strength >= 0.0))
    throw core::ConfigError("wave absorber_strength must be non-negative");
}

struct StepPlan
{
  double z0 = 0.0, h = 0.0;
  HalfIntegrals first, second;
  // aperture radius applied after the step, 0 for none
  double aperture = 0.0;
};

struct Plan
{
  std::vector<StepPlan> steps;
  // snapshot i is taken after step snapshot_after[i] steps
  std::vector<std::size_t> snapshot_after;
};

constexpr std::size_t max_plan_steps = 50'000'000;

Plan make_plan(const analytic::OpticalColumn& column, double z_start,
               const std::vector<double>& planes, const WaveOptions& options)
{
  Plan plan;
  std::vector<analytic::Aperture> apertures = column.apertures;
  std::sort(apertures.begin(), apertures.end(),
            [](const auto& a, const auto& b) { return a.z < b.z; });
  std::size_t next_ap = 0;
  while (next_ap < apertures.size() && apertures[next_ap].z <= z_start)
    ++next_ap;

  double z = z_start;
  for (double target : planes)
  {
    while (z < target)
    {
      double stop = target;
      bool at_aperture = false;
      if (next_ap < apertures.size() && apertures[next_ap].z <= target)
      {
        stop = apertures[next_ap].z;
        at_aperture = true;
      }
      const double h = ladder_step(options.free_step, step_bound(column, z, options));
      StepPlan s;
      s.z0 = z;
      const bool lands = stop - z <= h * (1.0 + 1e-9);
      s.h = lands ? stop - z : h;
      const double z1 = lands ? stop : z + h;
      s.first = gauss3(column, z, z + 0.5 * s.h);
      s.second = gauss3(column, z + 0.5 * s.h, z1);
      if (lands && at_aperture)
      {
        s.aperture = apertures[next_ap].radius;
        ++next_ap;
      }
      plan.steps.push_back(s);
      z = z1;
      if (plan.steps.size() > max_plan_steps)
        throw core::ConfigError("wave propagation needs more than 5e7 steps; raise free_step");
    }
    plan.snapshot_after.push_back(plan.steps.size());
  }
  return plan;
}

// Propagator for one azimuthal order on a fixed grid.
class ComponentPropagator
{
public:
  ComponentPropagator(const RadialGrid& grid, const core::BeamParameters& beam, int m,
                      const WaveOptions& options)
      : grid_(grid), m_(m), k_(beam.wavenumber), p_(std::sqrt(beam.momentum_squared())),
        kernels_(simd::active_kernels())
  {
    const std::size_t n = grid.size;
    const double dr = grid.spacing, inv2 = 1.0 / (dr * dr);
    w_.resize(n);
    rho2_.resize(n);
    s_lo_.resize(n);
    s_di_.resize(n);
    s_up_.resize(n);
    // S = W L with W = diag(rho_j): symmetric, Dirichlet outside the grid.
    for (std::size_t j = 0; j < n; ++j)
    {
      const double r = grid.rho(j);
      const double r_in = j * dr, r_out = (j + 1) * dr;
      w_[j] = r;
      rho2_[j] = r * r;
      s_lo_[j] = j == 0 ? 0.0 : r_in * inv2;
      s_up_[j] = j + 1 == n ? 0.0 : r_out * inv2;
      s_di_[j] = -(r_in + r_out) * inv2 - static_cast<double>(m) * m / r;
    }
    if (options.absorber)
    {
      j_abs_ = static_cast<std::size_t>(std::floor((1.0 - options.absorber_fraction) * n));
      const double ramp = (n - j_abs_) * dr;
      gamma_max_ = options.absorber_strength > 0.0
                       ? options.absorber_strength
                       : 10.0 * core::pi / (k_ * dr * ramp);
    }
    else
    {
      j_abs_ = n;
    }
    work_.resize(n);
    phasor_.resize(n);
  }

  // Returns absorbed power.
  double advance(std::vector<Complex>& u, const StepPlan& s)
  {
    apply_phase(u, s.first);
    diffract(u, s.h);
    apply_phase(u, s.second);
    double absorbed = absorb(u, s.h);
    if (s.aperture > 0.0)
      absorbed += truncate(u, s.aperture);
    return absorbed;
  }

private:
  struct Cached
  {
    core::TridiagonalFactor lhs;
    std::vector<double> lo, di, up, mask;
  };

  const Cached& cached(double h)
  {
    auto it = cache_.find(h);
    if (it != cache_.end())
      return it->second;
    if (cache_.size() > 64)
      cache_.clear();
    const std::size_t n = grid_.size;
    const double beta = h / (4.0 * k_);
    Cached c;
    c.lo.resize(n);
    c.di.resize(n);
    c.up.resize(n);
    std::vector<Complex> lo(n), di(n), up(n);
    for (std::size_t j = 0; j < n; ++j)
    {
      c.lo[j] = beta * s_lo_[j];
      c.di[j] = beta * s_di_[j];
      c.up[j] = beta * s_up_[j];
      lo[j] = Complex(0.0, -c.lo[j]);
      di[j] = Complex(w_[j], -c.di[j]);
      up[j] = Complex(0.0, -c.up[j]);
    }
    c.lhs = core::TridiagonalFactor(lo, di, up);
    c.mask.resize(n - j_abs_);
    for (std::size_t j = j_abs_; j < n; ++j)
    {
      const double t = (j - j_abs_ + 0.5) / static_cast<double>(n - j_abs_);
      c.mask[j - j_abs_] = std::exp(-gamma_max_ * t * t * h);
    }
    return cache_.emplace(h, std::move(c)).first->second;
  }

  void apply_phase(std::vector<Complex>& u, const HalfIntegrals& in)
  {
    if (in.zero())
      return;
    const PotentialPhase ph = phase_of(in, p_, m_);
    const std::size_t n = grid_.size;
    if (std::abs(ph.quadratic) * rho2_[n - 1] < 1e-14)
    {
      if (ph.larmor == 0.0)
        return;
      const Complex g = std::polar(1.0, ph.larmor);
      for (auto& v : u)
        v *= g;
      return;
    }
    for (std::size_t j = 0; j < n; ++j)
      phasor_[j] = std::polar(1.0, ph.larmor - ph.quadratic * rho2_[j]);
    kernels_.multiply(u.data(), phasor_.data(), n);
  }

  // (W - i beta S) u_new = (W + i beta S) u_old
  void diffract(std::vector<Complex>& u, double h)
  {
    const Cached& c = cached(h);
    kernels_.tridiagonal_apply(u.data(), w_.data(), c.lo.data(), c.di.data(), c.up.data(),
                               work_.data(), grid_.size);
    c.lhs.solve_in_place(work_);
    u.swap(work_);
  }

  double absorb(std::vector<Complex>& u, double h)
  {
    const std::size_t n = grid_.size;
    if (j_abs_ >= n)
      return 0.0;
    const Cached& c = cached(h);
    const std::size_t len = n - j_abs_;
    const double before = kernels_.weighted_power(u.data() + j_abs_, w_.data() + j_abs_, len);
    for (std::size_t j = j_abs_; j < n; ++j)
      u[j] *= c.mask[j - j_abs_];
    const double after = kernels_.weighted_power(u.data() + j_abs_, w_.data() + j_abs_, len);
    return 2.0 * core::pi * grid_.spacing * (before - after);
  }

  double truncate(std::vector<Complex>& u, double radius)
  {
    const double dr = grid_.spacing;
    double removed = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
    {
      const double inner = j * dr, outer = (j + 1) * dr;
      const double f = std::clamp(
          (radius * radius - inner * inner) / (outer * outer - inner * inner), 0.0, 1.0);
      removed += (1.0 - f) * std::norm(u[j]) * w_[j];
      u[j] *= std::sqrt(f);
    }
    return 2.0 * core::pi * dr * removed;
  }

  RadialGrid grid_;
  int m_;
  double k_, p_;
  const simd::Kernels& kernels_;
  std::vector<double> w_, rho2_, s_lo_, s_di_, s_up_;
  std::size_t j_abs_ = 0;
  double gamma_max_ = 0.0;
  std::vector<Complex> work_, phasor_;
  std::map<double, Cached> cache_;
};

void check_wave(const AzimuthalWave& wave)
{
  wave.grid.validate();
  if (!(wave.beam.wavenumber > 0.0))
    throw core::ConfigError("wave has no beam parameters");
  for (const auto& [m, u] : wave.components)
    if (u.size() != wave.grid.size)
      throw core::ConfigError("component m = " + std::to_string(m) +
                              " does not match the grid size");
}

// Runs `plan` for every component; fills per-snapshot component copies.
PropagationResult run_plan(const AzimuthalWave& wave, const Plan& plan, const WaveOptions& options)
{
  std::vector<int> orders;
  for (const auto& [m, u] : wave.components)
    orders.push_back(m);
  const std::size_t n_snap = plan.snapshot_after.size();
  // profiles[c][s]
  std::vector<std::vector<std::vector<Complex>>> profiles(orders.size());
  std::vector<std::vector<Complex>> finals(orders.size());
  std::vector<double> absorbed(orders.size(), 0.0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;)
    {
      const std::size_t c = next.fetch_add(1);
      if (c >= orders.size())
        return;
      try
      {
        ComponentPropagator prop(wave.grid, wave.beam, orders[c], options);
        std::vector<Complex> u = wave.components.at(orders[c]);
        profiles[c].resize(n_snap);
        std::size_t snap = 0;
        for (std::size_t i = 0; i <= plan.steps.size(); ++i)
        {
          while (snap < n_snap && plan.snapshot_after[snap] == i)
            profiles[c][snap++] = u;
          if (i < plan.steps.size())
            absorbed[c] += prop.advance(u, plan.steps[i]);
        }
        finals[c] = std::move(u);
      }
      catch (...)
      {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };

  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(orders.size())));
  if (threads == 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto& t : pool)
      t.join();
  }
  if (failure)
    std::rethrow_exception(failure);

  PropagationResult result;
  result.steps = plan.steps.size();
  for (double a : absorbed)
    result.absorbed += a;
  double z_end = wave.z;
  if (!plan.steps.empty())
    z_end = plan.steps.back().z0 + plan.steps.back().h;
  result.snapshots.resize(n_snap);
  for (std::size_t s = 0; s < n_snap; ++s)
  {
    auto& snap = result.snapshots[s];
    snap.wave.grid = wave.grid;
    snap.wave.beam = wave.beam;
    const std::size_t after = plan.snapshot_after[s];
    snap.z = after == 0 ? wave.z : plan.steps[after - 1].z0 + plan.steps[after - 1].h;
    snap.wave.z = snap.z;
    for (std::size_t c = 0; c < orders.size(); ++c)
      snap.wave.components[orders[c]] = std::move(profiles[c][s]);
  }
  result.final_wave.grid = wave.grid;
  result.final_wave.beam = wave.beam;
  result.final_wave.z = z_end;
  for (std::size_t c = 0; c < orders.size(); ++c)
    result.final_wave.components[orders[c]] = std::move(finals[c]);
  return result;
}

// Radius enclosing all but 1e-4 of the component's power.
double occupied_radius(const std::vector<Complex>& u, const RadialGrid& grid)
{
  double total = 0.0;
  for (std::size_t j = 0; j < grid.size; ++j)
    total += std::norm(u[j]) * grid.rho(j);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size; ++j)
  {
    acc += std::norm(u[j]) * grid.rho(j);
    if (acc >= (1.0 - 1e-4) * total)
      return (j + 1) * grid.spacing;
  }
  return grid.extent();
}

// The accumulated lens phase must stay sampled where the launched beam sits:
// 2 |Q| rho_occ d_rho <= pi / 2.
std::vector<std::string> resolution_warnings(const AzimuthalWave& wave, const Plan& plan)
{
  std::vector<std::string> out;
  const double p = std::sqrt(wave.beam.momentum_squared());
  for (const auto& [m, u] : wave.components)
  {
    const double edge = occupied_radius(u, wave.grid);
    double q = 0.0, q_max = 0.0;
    for (const auto& s : plan.steps)
    {
      q += phase_of(s.first, p, m).quadratic + phase_of(s.second, p, m).quadratic;
      q_max = std::max(q_max, std::abs(q));
    }
    const double kd = 2.0 * q_max * edge * wave.grid.spacing;
    if (kd > 0.5 * core::pi)
    {
      std::ostringstream msg;
      msg << "m = " << m << ": lens phase under-resolved across the beam (k_rho d_rho = " << kd
          << " > pi/2); reduce d_rho below " << wave.grid.spacing * 0.5 * core::pi / kd << " m";
      out.push_back(msg.str());
    }
  }
  return out;
}

} // namespace

double step_bound(const analytic::OpticalColumn& column, double z, const WaveOptions& options)
{
  double bound = options.free_step;
  for (const auto& el : column.elements)
  {
    const double ext = el.model.longitudinal_extent();
    const double inner = ext / options.steps_per_extent;
    const double region = options.lens_region_factor * ext;
    const double dist = std::abs(z - el.z_center);
    const double b = dist <= region ? inner : std::max(inner, 0.5 * (dist - region));
    bound = std::min(bound, b);
  }
  return bound;
}

PropagationResult propagate(const AzimuthalWave& wave, const analytic::OpticalColumn& column,
                            const std::vector<double>& sample_planes, const WaveOptions& options)
{
  check_options(options);
  check_wave(wave);
  column.validate();
  for (std::size_t i = 0; i < sample_planes.size(); ++i)
  {
    if (!std::isfinite(sample_planes[i]) || sample_planes[i] < wave.z)
      throw core::ConfigError("sample planes must be finite and not before the wave plane");
    if (i > 0 && sample_planes[i] < sample_planes[i - 1])
      throw core::ConfigError("sample planes must be sorted");
  }
  const Plan plan = make_plan(column, wave.z, sample_planes, options);
  PropagationResult result = run_plan(wave, plan, options);
  result.warnings = resolution_warnings(wave, plan);
  // planes equal to the start hand back the input unchanged
  for (auto& snap : result.snapshots)
    if (snap.z == wave.z)
      snap.wave = wave;
  return result;
}

AzimuthalWave step(const AzimuthalWave& wave, double dz, const analytic::OpticalColumn& column,
                   const WaveOptions& options, StepReport* report)
{
  if (!(dz > 0.0) || !std::isfinite(dz))
    throw core::DomainError("wave step dz must be positive");
  check_options(options);
  check_wave(wave);
  column.validate();

  // The caller's dz is the free step; the ladder only refines it where needed.
  WaveOptions local = options;
  local.free_step = dz;
  const Plan plan = make_plan(column, wave.z, {wave.z + dz}, local);
  PropagationResult r = run_plan(wave, plan, local);
  if (report)
  {
    report->substeps = plan.steps.size();
    report->absorbed = r.absorbed;
    report->warnings = resolution_warnings(wave, plan);
    const double bound = step_bound(column, wave.z, options);
    if (dz > bound)
    {
      std::ostringstream msg;
      msg << "dz = " << dz << " m exceeds the local step bound near the lens; split into "
          << plan.steps.size() << " sub-steps (recommended dz <= " << bound << " m)";
      report->warnings.push_back(msg.str());
    }
  }
  return std::move(r.final_wave);
}

PotentialPhase integrate_potential(const analytic::OpticalColumn& column,
                                   const core::BeamParameters& beam, int m, double z0, double z1,
                                   const WaveOptions& options)
{
  check_options(options);
  if (!(z1 >= z0))
    throw core::DomainError("integrate_potential needs z1 >= z0");
  analytic::OpticalColumn no_apertures = column;
  no_apertures.apertures.clear();
  const Plan plan = make_plan(no_apertures, z0, {z1}, options);
  const double p = std::sqrt(beam.momentum_squared());
  PotentialPhase total;
  for (const auto& s : plan.steps)
    for (const auto* half : {&s.first, &s.second})
    {
      const auto ph = phase_of(*half, p, m);
      total.larmor += ph.larmor;
      total.quadratic += ph.quadratic;
    }
  return total;
}

AzimuthalWave apply_lens_slice(const AzimuthalWave& wave, const analytic::OpticalColumn& column,
                               double z0, double z1, const WaveOptions& options)
{
  check_wave(wave);
  AzimuthalWave out = wave;
  for (auto& [m, u] : out.components)
  {
    const auto ph = integrate_potential(column, wave.beam, m, z0, z1, options);
    for (std::size_t j = 0; j < u.size(); ++j)
    {
      const double r = wave.grid.rho(j);
      u[j] *= std::polar(1.0, ph.larmor - ph.quadratic * r * r);
    }
  }
  return out;
}

} // namespace oamlens::wave

#include "oamlens/ray.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"
#include "oamlens/roots.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <thread>

namespace oamlens::ray
{

using core::PhysicalConstants;

namespace
{

double rhs_from_field(const RayState& s, double b1, double b3_over_b2,
                      const core::BeamParameters& beam)
{
  const double e = PhysicalConstants::e_charge;
  const double p2 = beam.momentum_squared();
  double out = -(e * e * b1 * b1 - e * b3_over_b2 * s.m * PhysicalConstants::hbar) * s.rho /
               (4.0 * p2);
  if (s.m != 0)
  {
    if (s.rho == 0.0)
      throw core::DomainError("radial_rhs: rho = 0 with m != 0 (centrifugal singularity)");
    const double c = s.m / beam.wavenumber;
    out += c * c / (s.rho * s.rho * s.rho);
  }
  return out;
}

using Vec = std::array<double, 2>; // rho, rho'

struct Stepper
{
  const analytic::OpticalColumn& column;
  const core::BeamParameters& beam;
  int m;

  Vec f(double z, const Vec& y) const
  {
    if (m != 0 && !(y[0] > 0.0))
      throw core::DomainError("ray with m != 0 reached the axis");
    const auto field = analytic::column_field(column, z);
    return {y[1], rhs_from_field({z, y[0], y[1], m}, field.b1, field.b3_over_b2, beam)};
  }
};

// Quintic Hermite on [z0, z0 + h] through rho, rho', rho'' at both ends.
struct Dense
{
  double z0, h;
  double y0, d0, s0, y1, d1, s1;

  Vec eval(double z) const
  {
    const double t = (z - z0) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
    const double g00 = -30 * t2 + 60 * t3 - 30 * t4;
    const double g10 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    const double g20 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
    const double g11 = -12 * t2 + 28 * t3 - 15 * t4;
    const double g21 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
    const double rho = h00 * y0 + h * (h10 * d0 + h11 * d1) + h * h * (h20 * s0 + h21 * s1) +
                       h01 * y1;
    const double slope = (g00 * y0 - g00 * y1) / h + (g10 * d0 + g11 * d1) +
                         h * (g20 * s0 + g21 * s1);
    return {rho, slope};
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms)
{
  Vec out = y;
  for (const auto& [w, k] : terms)
  {
    out[0] += h * w * (*k)[0];
    out[1] += h * w * (*k)[1];
  }
  return out;
}

struct StepResult
{
  Vec y;
  Vec f_end;
  double err_norm;  // scaled, <= 1 means accept
  double err_rho;   // absolute local error estimates
  double err_slope;
};

StepResult dopri_step(const Stepper& st, double z, const Vec& y, const Vec& k1, double h,
                      const Vec& atol, double rtol)
{
  const Vec k2 = st.f(z + c2 * h, axpy(y, h, {{a21, &k1}}));
  const Vec k3 = st.f(z + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const Vec k4 = st.f(z + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Vec k5 =
      st.f(z + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Vec k6 = st.f(z + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                         {a65, &k5}}));
  const Vec y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const Vec k7 = st.f(z + h, y_new);
  double norm = 0.0;
  Vec err{};
  for (int i = 0; i < 2; ++i)
  {
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = atol[i] + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
    norm += (err[i] / sc) * (err[i] / sc);
  }
  return {y_new, k7, std::sqrt(norm / 2.0), std::abs(err[0]), std::abs(err[1])};
}

StepResult rk4_step(const Stepper& st, double z, const Vec& y, const Vec& k1, double h)
{
  const Vec k2 = st.f(z + h / 2, axpy(y, h, {{0.5, &k1}}));
  const Vec k3 = st.f(z + h / 2, axpy(y, h, {{0.5, &k2}}));
  const Vec k4 = st.f(z + h, axpy(y, h, {{1.0, &k3}}));
  const Vec y_new = axpy(y, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}});
  return {y_new, st.f(z + h, y_new), 0.0, 0.0, 0.0};
}

// Keeps steps from jumping over a lens: near an element the step is bounded
// by a quarter of its extent, further away by half the distance to it.
double proximity_limit(const analytic::OpticalColumn& column, double z)
{
  double limit = std::numeric_limits<double>::infinity();
  for (const auto& el : column.elements)
  {
    const double extent = el.model.longitudinal_extent();
    limit = std::min(limit, std::max(0.25 * extent, 0.5 * std::abs(z - el.z_center)));
  }
  return limit;
}

bool beyond_b(const analytic::OpticalColumn& column, double z, double rho)
{
  for (const auto& el : column.elements)
    if (std::abs(z - el.z_center) < 10.0 * el.model.longitudinal_extent() &&
        std::abs(rho) > el.model.b())
      return true;
  return false;
}

} // namespace

double radial_rhs(const RayState& state, const analytic::OpticalColumn& column,
                  const core::BeamParameters& beam)
{
  const auto field = analytic::column_field(column, state.z);
  return rhs_from_field(state, field.b1, field.b3_over_b2, beam);
}

double radial_rhs(const RayState& state, const fields::AxialFieldModel& model,
                  const core::BeamParameters& beam, double z_center)
{
  const double local = state.z - z_center;
  if (local < model.support_min() || local > model.support_max())
    return rhs_from_field(state, 0.0, 0.0, beam);
  const auto s = fields::eval_axial_field(model, local);
  return rhs_from_field(state, s.b1, s.b3 / (model.b() * model.b()), beam);
}

RayTrajectory trace(const RayState& initial, const analytic::OpticalColumn& column,
                    const core::BeamParameters& beam, double z_end, const TraceOptions& options)
{
  column.validate();
  if (!(z_end > initial.z))
    throw core::DomainError("trace: z_end must exceed the initial z");
  const bool fixed = options.integrator == Integrator::FixedStepRK4;
  if (!fixed && !(options.rel_tol > 1e-14 && options.rel_tol < 1e-3))
    throw core::DomainError("trace: rel_tol must lie in (1e-14, 1e-3)");
  if (fixed && !(options.fixed_step > 0.0))
    throw core::DomainError("trace: fixed_step must be positive");
  if (!(options.max_step > 0.0))
    throw core::DomainError("trace: max_step must be positive");
  if (initial.m != 0 && !(initial.rho > 0.0))
    throw core::DomainError("trace: rays with m != 0 need rho > 0");

  std::vector<double> planes = options.sample_planes;
  std::sort(planes.begin(), planes.end());
  planes.erase(std::remove_if(planes.begin(), planes.end(),
                              [&](double z) { return z <= initial.z || z >= z_end; }),
               planes.end());
  planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
  const bool every_step = options.sample_planes.empty();

  RayTrajectory traj;
  traj.m = initial.m;
  traj.column_description = analytic::describe(column);
  traj.samples.push_back(initial);

  const Stepper st{column, beam, initial.m};
  double min_extent = std::abs(z_end - initial.z);
  for (const auto& el : column.elements)
    min_extent = std::min(min_extent, el.model.longitudinal_extent());
  const double rho_scale = std::max(std::abs(initial.rho), 1e-12);
  // A slope error grows into a height error over the rest of the run, so the
  // slope scale is the height scale over the run length.
  const double run = z_end - initial.z;
  const Vec atol = {options.rel_tol * rho_scale,
                    options.rel_tol * std::max(std::abs(initial.rho_prime), rho_scale / run)};

  double z = initial.z;
  Vec y = {initial.rho, initial.rho_prime};
  Vec k = st.f(z, y);
  double h = fixed ? options.fixed_step
                   : std::min({options.max_step, proximity_limit(column, z), 0.01 * min_extent});
  std::size_t next_plane = 0;
  traj.beyond_dispersion_length = beyond_b(column, z, y[0]);

  while (z < z_end)
  {
    if (traj.accepted_steps + traj.rejected_steps >= options.max_steps)
      throw core::NumericalError("trace: step budget exhausted", y[0], traj.error_estimate);

    double step = h;
    if (!fixed)
      step = std::min({step, options.max_step, proximity_limit(column, z)});
    const bool last = z + step >= z_end;
    if (last)
      step = z_end - z;

    StepResult r;
    bool ok = true;
    try
    {
      r = fixed ? rk4_step(st, z, y, k, step) : dopri_step(st, z, y, k, step, atol, options.rel_tol);
      if (!std::isfinite(r.y[0]) || !std::isfinite(r.y[1]) || (initial.m != 0 && r.y[0] <= 0.0))
        ok = false;
    }
    catch (const core::DomainError&)
    {
      ok = false;
    }
    if (fixed && !ok)
      throw core::NumericalError("trace: fixed-step RK4 reached the axis with m != 0 "
                                 "(centrifugal singularity); reduce fixed_step",
                                 y[0], 0.0);
    if (!fixed && (!ok || r.err_norm > 1.0))
    {
      ++traj.rejected_steps;
      const double factor = ok ? std::max(0.2, 0.9 * std::pow(r.err_norm, -0.2)) : 0.25;
      h = step * factor;
      if (h < 1e-13 * std::max(std::abs(z), min_extent))
        throw core::NumericalError(initial.m != 0
                                       ? "trace: step size collapsed near the axis; the "
                                         "centrifugal singularity of an m != 0 ray"
                                       : "trace: step size collapsed",
                                   y[0], traj.error_estimate);
      continue;
    }

    const double z_new = last ? z_end : z + step;
    const Dense dense{z, z_new - z, y[0], y[1], k[1], r.y[0], r.y[1], r.f_end[1]};

    // Events inside the step.
    if (initial.m == 0 && ((y[0] > 0.0 && r.y[0] <= 0.0) || (y[0] < 0.0 && r.y[0] >= 0.0)))
    {
      const double zc = r.y[0] == 0.0 ? z_new
                                      : core::find_root([&](double zz) { return dense.eval(zz)[0]; },
                                                        z, z_new);
      traj.events.push_back({EventKind::AxisCrossing, zc, 0.0});
    }
    if (y[1] < 0.0 && r.y[1] >= 0.0)
    {
      const double zm = r.y[1] == 0.0 ? z_new
                                      : core::find_root([&](double zz) { return dense.eval(zz)[1]; },
                                                        z, z_new);
      traj.events.push_back({EventKind::RadialMinimum, zm, dense.eval(zm)[0]});
    }

    while (next_plane < planes.size() && planes[next_plane] <= z_new)
    {
      const double zp = planes[next_plane++];
      const Vec v = dense.eval(zp);
      traj.samples.push_back({zp, v[0], v[1], initial.m});
    }

    z = z_new;
    y = r.y;
    k = r.f_end;
    ++traj.accepted_steps;
    traj.error_estimate += r.err_rho + r.err_slope * (z_end - z);
    traj.beyond_dispersion_length = traj.beyond_dispersion_length || beyond_b(column, z, y[0]);
    if (every_step && z < z_end)
      traj.samples.push_back({z, y[0], y[1], initial.m});
    if (!fixed)
      h = step * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(r.err_norm, 1e-10), -0.2)));
  }
  traj.samples.push_back({z_end, y[0], y[1], initial.m});
  return traj;
}

std::vector<RayTrajectory> trace_many(std::span<const RayState> initial,
                                      const analytic::OpticalColumn& column,
                                      const core::BeamParameters& beam, double z_end,
                                      const TraceOptions& options, unsigned threads)
{
  std::vector<RayTrajectory> out(initial.size());
  std::vector<std::exception_ptr> errors(initial.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < initial.size(); i = next++)
    {
      try
      {
        out[i] = trace(initial[i], column, beam, z_end, options);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, initial.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();
  for (auto& err : errors)
    if (err)
      std::rethrow_exception(err);
  return out;
}

FocalCrossing focal_crossing(const RayTrajectory& traj)
{
  const EventKind wanted = traj.m == 0 ? EventKind::AxisCrossing : EventKind::RadialMinimum;
  for (const auto& ev : traj.events)
    if (ev.kind == wanted)
      return {true, ev.z, ev.rho};

  const auto& s = traj.samples;
  for (std::size_t i = 1; i < s.size(); ++i)
  {
    if (traj.m == 0)
    {
      if ((s[i - 1].rho > 0.0 && s[i].rho <= 0.0) || (s[i - 1].rho < 0.0 && s[i].rho >= 0.0))
      {
        const double t = s[i - 1].rho / (s[i - 1].rho - s[i].rho);
        return {true, s[i - 1].z + t * (s[i].z - s[i - 1].z), 0.0};
      }
    }
    else if (i + 1 < s.size() && s[i].rho < s[i - 1].rho && s[i].rho <= s[i + 1].rho)
    {
      // Vertex of the parabola through three samples, in coordinates
      // centred on the middle one.
      const double u0 = s[i - 1].z - s[i].z, u2 = s[i + 1].z - s[i].z;
      const double v0 = s[i - 1].rho - s[i].rho, v2 = s[i + 1].rho - s[i].rho;
      const double a = (v0 / u0 - v2 / u2) / (u0 - u2);
      const double b = v0 / u0 - a * u0;
      if (a > 0.0)
        return {true, s[i].z - b / (2.0 * a), s[i].rho - b * b / (4.0 * a)};
      return {true, s[i].z, s[i].rho};
    }
  }
  return {};
}

double launch_radius(double w0, int m)
{
  return w0 * std::sqrt(std::abs(m) / 2.0);
}

void write_trajectory_csv(std::ostream& out, std::span<const RayTrajectory> trajectories)
{
  out << "z,rho,rho_prime,m\n";
  out << std::setprecision(17);
  for (const auto& t : trajectories)
    for (const auto& s : t.samples)
      out << s.z << ',' << s.rho << ',' << s.rho_prime << ',' << s.m << '\n';
}

} // namespace oamlens::ray

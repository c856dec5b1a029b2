#include "oamlens/analytic.hpp"
#include "oamlens/errors.hpp"
#include "oamlens/wave.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace oamlens;
using fields::AxialFieldModel;
using wave::RadialGrid;

namespace
{

const core::BeamParameters beam80 = core::make_beam(80e3);

analytic::OpticalColumn single_lens(const AxialFieldModel& model, double z_center = 0.0)
{
  analytic::OpticalColumn col;
  col.elements.push_back({model, z_center});
  return col;
}

double rayleigh(double w0) { return beam80.wavenumber * w0 * w0 / 2.0; }

// Direct midpoint sums, independent of the wave class.
double direct_power(const std::vector<wave::Complex>& u, const RadialGrid& g)
{
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size; ++j)
    acc += std::norm(u[j]) * 2.0 * M_PI * g.rho(j) * g.spacing;
  return acc;
}

} // namespace

TEST_CASE("LG modes are normalised with the analytic second moment")
{
  const double w0 = 1e-6;
  const RadialGrid g{4096, w0 / 128.0};
  for (int m : {0, 1, -3, 8})
  {
    CAPTURE(m);
    auto w = wave::lg_mode({{m, w0}}, g, beam80);
    CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(direct_power(w.components.at(m), g) == doctest::Approx(1.0).epsilon(1e-12));
    // <rho^2> = w0^2 (|m| + 1) / 2 for p = 0
    CHECK(w.mean_square_radius(m) ==
          doctest::Approx(w0 * w0 * (std::abs(m) + 1) / 2.0).epsilon(1e-5));
    // intensity peak at w0 sqrt(|m| / 2)
    const auto& u = w.components.at(m);
    std::size_t jmax = 0;
    for (std::size_t j = 0; j < g.size; ++j)
      if (std::norm(u[j]) > std::norm(u[jmax]))
        jmax = j;
    CHECK(std::abs(g.rho(jmax) - w0 * std::sqrt(std::abs(m) / 2.0)) <= g.spacing);
  }
}

TEST_CASE("superpositions split power by amplitude")
{
  const double w0 = 1e-6;
  const RadialGrid g{2048, w0 / 64.0};
  auto w = wave::lg_mode({{-1, w0, {1.0, 0.0}}, {1, w0, {0.0, 2.0}}}, g, beam80);
  const auto s = wave::oam_spectrum(w);
  CHECK(s.at(-1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s.at(1) == doctest::Approx(0.8).epsilon(1e-12));

  auto pure = wave::lg_mode({{3, w0}}, g, beam80);
  CHECK(wave::oam_spectrum(pure).at(3) == 1.0);
  auto cut = wave::aperture_transmission(w, w0).transmitted;
  const auto sc = wave::oam_spectrum(cut);
  CHECK(sc.at(-1) + sc.at(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid bounds are enforced by name")
{
  const double w0 = 1e-6;
  try
  {
    wave::lg_mode({{0, w0}}, RadialGrid{64, w0 / 8.0}, beam80);
    FAIL("expected ConfigError");
  }
  catch (const core::ConfigError& e)
  {
    CHECK(std::string(e.what()).find("w0/16") != std::string::npos);
  }
  try
  {
    wave::lg_mode({{4, w0}}, RadialGrid{64, w0 / 16.0}, beam80);
    FAIL("expected ConfigError");
  }
  catch (const core::ConfigError& e)
  {
    CHECK(std::string(e.what()).find("4 w0 sqrt(|m|/2 + 1)") != std::string::npos);
  }
  CHECK_THROWS_AS(wave::lg_mode({}, RadialGrid{64, w0 / 16.0}, beam80), core::ConfigError);
  CHECK_THROWS_AS(wave::lg_mode({{0, w0}}, RadialGrid{0, 1e-9}, beam80), core::ConfigError);
}

TEST_CASE("free-space LG diffraction follows the Gaussian width law")
{
  const double w0 = 1e-6, zr = rayleigh(w0);
  const RadialGrid g{2048, w0 / 64.0};
  for (int m : {0, 2})
  {
    CAPTURE(m);
    auto w = wave::lg_mode({{m, w0}}, g, beam80);
    wave::WaveOptions opt;
    opt.free_step = zr / 100.0;
    auto r = wave::propagate(w, {}, {0.5 * zr, zr, 2.0 * zr, 4.0 * zr}, opt);
    REQUIRE(r.snapshots.size() == 4);
    for (const auto& s : r.snapshots)
    {
      const double wz = w0 * std::sqrt(1.0 + (s.z / zr) * (s.z / zr));
      const double rms = std::sqrt(s.wave.mean_square_radius(m));
      CHECK(rms == doctest::Approx(wz * std::sqrt((std::abs(m) + 1) / 2.0)).epsilon(5e-3));
    }
  }
}

TEST_CASE("Crank-Nicolson steps conserve the norm through a lens")
{
  const double w0 = 0.5e-6;
  const RadialGrid g{1024, w0 / 32.0};
  auto w = wave::lg_mode({{-2, w0}, {0, w0}, {3, w0}}, g, beam80, -2e-4);
  const auto col = single_lens(AxialFieldModel::glaser(2.0, 10e-6, 100e-9));
  wave::WaveOptions opt;
  opt.absorber = false;
  opt.free_step = 4e-7;
  auto r = wave::propagate(w, col, {2e-4}, opt);
  CHECK(r.steps >= 1000);
  CHECK(std::abs(r.final_wave.norm() - 1.0) < 1e-10);
  const auto before = wave::oam_spectrum(w);
  const auto after = wave::oam_spectrum(r.final_wave);
  REQUIRE(before.size() == after.size());
  for (const auto& [m, p] : before)
    CHECK(std::abs(after.at(m) - p) < 1e-12);
}

TEST_CASE("the potential phase integrates to the thin-lens focal law")
{
  const auto lens = AxialFieldModel::glaser(2.0, 10e-6, 100e-9);
  const auto col = single_lens(lens);
  for (int m : {-3, 0, 1, 5})
  {
    CAPTURE(m);
    // Glaser tails fall off as 1/z^2, so integrate over many extents.
    const auto ph = wave::integrate_potential(col, beam80, m, -0.1, 0.1);
    const double f = analytic::focal_length(lens, beam80, m).value;
    CHECK(ph.quadratic == doctest::Approx(beam80.wavenumber / (2.0 * f)).epsilon(1e-3));
    const double larmor = analytic::larmor_phase(lens, beam80, m);
    if (m == 0)
      CHECK(ph.larmor == 0.0);
    else
      CHECK(ph.larmor == doctest::Approx(larmor).epsilon(1e-3));
  }
}

TEST_CASE("a lens slice is a pure phase")
{
  const double w0 = 1e-6;
  const RadialGrid g{512, w0 / 16.0};
  auto w = wave::lg_mode({{1, w0}, {-1, w0}}, g, beam80);
  const auto col = single_lens(AxialFieldModel::glaser(2.0, 10e-6, 100e-9));
  auto out = wave::apply_lens_slice(w, col, -1e-4, 1e-4);
  for (const auto& [m, u] : w.components)
    for (std::size_t j = 0; j < g.size; ++j)
      CHECK(std::abs(out.components.at(m)[j]) == doctest::Approx(std::abs(u[j])).epsilon(1e-14));
}

TEST_CASE("a sample plane at the launch returns the input bit for bit")
{
  const double w0 = 1e-6;
  const RadialGrid g{256, w0 / 16.0};
  auto w = wave::lg_mode({{2, w0}}, g, beam80, 0.25);
  auto r = wave::propagate(w, {}, {0.25}, {});
  REQUIRE(r.snapshots.size() == 1);
  CHECK(r.steps == 0);
  CHECK(r.snapshots[0].wave.components == w.components);
  CHECK(r.snapshots[0].z == 0.25);
}

TEST_CASE("waist of a beam launched at its waist is the launch plane")
{
  const double w0 = 1e-6, zr = rayleigh(w0);
  const RadialGrid g{1024, w0 / 32.0};
  auto w = wave::lg_mode({{0, w0}}, g, beam80);
  wave::WaveOptions opt;
  opt.free_step = zr / 50.0;
  auto r = wave::propagate(w, {}, {0.0, 0.1 * zr, 0.2 * zr, 0.3 * zr}, opt);
  const auto z = wave::waist_position(r.snapshots, 0);
  REQUIRE(z.has_value());
  CHECK(std::abs(*z) < 1e-3 * zr);
  // Samples well past the waist do not bracket it.
  auto far = wave::propagate(w, {}, {zr, 2.0 * zr, 3.0 * zr}, opt);
  CHECK_FALSE(wave::waist_position(far.snapshots, 0).has_value());
}

TEST_CASE("a thin lens focuses to the back focal plane")
{
  const double w0 = 0.7e-6;
  const auto lens = AxialFieldModel::glaser(2.0, 10e-6, 200e-9);
  const double f0 = analytic::focal_length(lens, beam80, 0).value;
  const RadialGrid g{2048, 1.1 * 4.0 * w0 / 2048.0};
  auto w = wave::lg_mode({{0, w0}}, g, beam80, -f0);
  std::vector<double> planes;
  for (int i = -5; i <= 5; ++i)
    planes.push_back(f0 + i * 2e-4);
  auto r = wave::propagate(w, single_lens(lens), planes, {});
  const auto z = wave::waist_position(r.snapshots, 0);
  REQUIRE(z.has_value());
  CHECK(*z == doctest::Approx(f0).epsilon(1e-3));
}

TEST_CASE("reversing polarity and m gives the same propagation")
{
  const double w0 = 0.5e-6;
  const RadialGrid g{512, w0 / 32.0};
  const auto lens = AxialFieldModel::glaser(2.0, 10e-6, 100e-9);
  auto a = wave::lg_mode({{1, w0}}, g, beam80, -1e-3);
  auto b = wave::lg_mode({{-1, w0}}, g, beam80, -1e-3);
  auto ra = wave::propagate(a, single_lens(lens), {1e-3}, {});
  auto rb = wave::propagate(b, single_lens(lens.with_polarity(-1)), {1e-3}, {});
  CHECK(ra.final_wave.components.at(1) == rb.final_wave.components.at(-1));
}

TEST_CASE("results do not depend on the thread count")
{
  const double w0 = 0.5e-6;
  const RadialGrid g{512, w0 / 32.0};
  auto w = wave::lg_mode({{-4, w0}, {0, w0}, {1, w0}, {4, w0}}, g, beam80, -1e-3);
  const auto col = single_lens(AxialFieldModel::glaser(2.0, 10e-6, 100e-9));
  wave::WaveOptions one, four;
  four.threads = 4;
  auto r1 = wave::propagate(w, col, {0.0, 1e-3}, one);
  auto r4 = wave::propagate(w, col, {0.0, 1e-3}, four);
  for (std::size_t s = 0; s < 2; ++s)
    CHECK(r1.snapshots[s].wave.components == r4.snapshots[s].wave.components);
  CHECK(r1.absorbed == r4.absorbed);
}

TEST_CASE("step splits large requests near a lens and warns")
{
  const double w0 = 0.5e-6;
  const RadialGrid g{256, w0 / 16.0};
  auto w = wave::lg_mode({{0, w0}}, g, beam80, -5e-5);
  const auto col = single_lens(AxialFieldModel::glaser(2.0, 10e-6, 100e-9));
  wave::StepReport report;
  auto out = wave::step(w, 1e-4, col, {}, &report);
  CHECK(out.z == doctest::Approx(5e-5).epsilon(1e-12));
  CHECK(report.substeps >= 50);
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("recommended dz") != std::string::npos);

  wave::StepReport free_report;
  wave::step(w, 1e-4, {}, {}, &free_report);
  CHECK(free_report.substeps == 1);
  CHECK(free_report.warnings.empty());
  CHECK_THROWS_AS(wave::step(w, -1.0, col), core::DomainError);
}

TEST_CASE("absorber removes power reaching the grid edge")
{
  const double w0 = 1e-6, zr = rayleigh(w0);
  const RadialGrid g{256, w0 / 16.0}; // edge at 16 w0
  auto w = wave::lg_mode({{0, w0}}, g, beam80);
  wave::WaveOptions opt;
  opt.free_step = zr / 20.0;
  auto r = wave::propagate(w, {}, {30.0 * zr}, opt);
  CHECK(r.absorbed > 0.1);
  CHECK(r.final_wave.norm() + r.absorbed == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("aperture transmission limits")
{
  const double w0 = 1e-6;
  const RadialGrid g{1024, w0 / 32.0};
  auto w = wave::lg_mode({{0, w0}, {2, w0}}, g, beam80);
  auto big = wave::aperture_transmission(w, g.extent() * 2.0);
  CHECK(big.transmission.at(0) == 1.0);
  CHECK(big.transmitted_power == doctest::Approx(1.0).epsilon(1e-12));
  auto tiny = wave::aperture_transmission(w, 1e-12);
  CHECK(tiny.transmission.at(2) < 1e-10);
  // Gaussian: 1 - exp(-2 R^2 / w0^2)
  auto mid = wave::aperture_transmission(w, w0);
  CHECK(mid.transmission.at(0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-4));
  CHECK(mid.transmitted_power < 1.0);
  CHECK_THROWS_AS(wave::aperture_transmission(w, 0.0), core::DomainError);
}

TEST_CASE("column apertures truncate during propagation")
{
  const double w0 = 1e-6;
  const RadialGrid g{1024, w0 / 32.0};
  auto w = wave::lg_mode({{0, w0}}, g, beam80);
  analytic::OpticalColumn col;
  col.apertures.push_back({1e-6, w0});
  auto r = wave::propagate(w, col, {2e-6}, {});
  CHECK(r.final_wave.norm() == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-3));
}

TEST_CASE("synthesised vortex winds its phase by 2 pi m")
{
  const double w0 = 1e-6;
  const RadialGrid g{512, w0 / 32.0};
  for (int m : {1, -2})
  {
    CAPTURE(m);
    auto w = wave::lg_mode({{m, w0}}, g, beam80);
    auto field = wave::synthesize_2d(w, 128, 4.0 * w0 / 64.0);
    CHECK(field.power() == doctest::Approx(1.0).epsilon(1e-2));
    // walk around a circle of radius w0 and unwrap
    double total = 0.0;
    const int steps = 720;
    auto sample = [&](double phi) {
      const double c = 63.5;
      const auto col = static_cast<std::size_t>(std::lround(c + w0 * std::cos(phi) / field.pitch));
      const auto row = static_cast<std::size_t>(std::lround(c + w0 * std::sin(phi) / field.pitch));
      return std::arg(field.at(row, col));
    };
    const double first = sample(0.0);
    double prev = first;
    for (int i = 1; i <= steps; ++i)
    {
      const double cur = i == steps ? first : sample(2.0 * M_PI * i / steps);
      total += std::remainder(cur - prev, 2.0 * M_PI);
      prev = cur;
    }
    CHECK(total == doctest::Approx(2.0 * M_PI * m).epsilon(1e-9));
  }
}

TEST_CASE("azimuthal decomposition recovers the spectrum")
{
  const double w0 = 1e-6;
  const RadialGrid g{1024, w0 / 64.0};
  auto w = wave::lg_mode({{-1, w0, {1.0, 0.0}}, {2, w0, {0.0, 1.5}}}, g, beam80);
  auto field = wave::synthesize_2d(w, 256, 8.0 * w0 / 128.0);
  const auto s = wave::decompose_azimuthal(field, 4);
  CHECK(s.size() == 9);
  CHECK(s.at(-1) == doctest::Approx(1.0 / 3.25).epsilon(1e-3));
  CHECK(s.at(2) == doctest::Approx(2.25 / 3.25).epsilon(1e-3));
  CHECK(s.at(0) < 1e-3);
  CHECK_THROWS_AS(wave::synthesize_2d(w, 255, 1e-8), core::ConfigError);
  CHECK_THROWS_AS(wave::synthesize_2d(w, 256, 1e-6), core::ConfigError);
}

TEST_CASE("PGM and CSV writers")
{
  const double w0 = 1e-6;
  const RadialGrid g{256, w0 / 16.0};
  auto w = wave::lg_mode({{1, w0}}, g, beam80);
  auto field = wave::synthesize_2d(w, 32, 8.0 * w0 / 32.0);
  const auto dir = std::filesystem::temp_directory_path() / "oamlens_test_wave";
  std::filesystem::create_directories(dir);

  const auto paths = wave::write_intensity_pgm(field, dir / "i.pgm");
  REQUIRE(paths.size() == 2);
  CHECK(paths[1].extension() == ".json");
  std::ifstream in(paths[0], std::ios::binary);
  std::string magic;
  std::size_t nx = 0, ny = 0, maxval = 0;
  in >> magic >> nx >> ny >> maxval;
  in.get();
  CHECK(magic == "P5");
  CHECK(nx == 32);
  CHECK(maxval == 65535);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  CHECK(bytes.size() == 32 * 32 * 2);
  unsigned peak = 0;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2)
    peak = std::max(peak, (unsigned(bytes[i]) << 8) | bytes[i + 1]);
  CHECK(peak == 65535);
  CHECK(std::filesystem::exists(wave::write_phase_pgm(field, dir / "p.pgm")[1]));

  std::ostringstream prof;
  wave::write_profile_csv(prof, w, 1);
  CHECK(prof.str().rfind("rho,re_u,im_u\n", 0) == 0);
  std::ostringstream spec;
  wave::write_spectrum_csv(spec, wave::oam_spectrum(w));
  CHECK(spec.str().rfind("m,power\n1,", 0) == 0);
  CHECK_THROWS_AS(wave::write_profile_csv(prof, w, 3), core::DomainError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("under-resolved lens phase is reported")
{
  const auto lens = AxialFieldModel::glaser(2.0, 1e-3, 79e-9);
  const double w0 = 0.7e-6;
  const RadialGrid coarse{512, 1.1 * 4.0 * w0 * std::sqrt(5.0) / 512.0};
  auto w = wave::lg_mode({{-8, w0}, {8, w0}}, coarse, beam80, -2e-3);
  wave::WaveOptions opt;
  opt.free_step = 1e-3;
  auto r = wave::propagate(w, single_lens(lens), {2e-3}, opt);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings[0].find("under-resolved") != std::string::npos);

  auto ok = wave::propagate(w, {}, {2e-3}, opt);
  CHECK(ok.warnings.empty());
}

TEST_CASE("halving the grid and step moves the waist by less than 0.2 percent")
{
  const double w0 = 0.7e-6;
  const auto lens = AxialFieldModel::glaser(2.0, 10e-6, 200e-9);
  const auto col = single_lens(lens);
  const double f0 = analytic::focal_length(lens, beam80, 0).value;
  auto waist = [&](std::size_t n, double free_step, int m) {
    const RadialGrid g{n, 1.1 * 4.0 * w0 * std::sqrt(3.0) / static_cast<double>(n)};
    auto w = wave::lg_mode({{m, w0}}, g, beam80, -f0);
    const double fm = analytic::focal_length(lens, beam80, m).value;
    std::vector<double> planes;
    for (int i = -4; i <= 4; ++i)
      planes.push_back(fm + i * 2e-4);
    wave::WaveOptions opt;
    opt.free_step = free_step;
    auto r = wave::propagate(w, col, planes, opt);
    return wave::waist_position(r.snapshots, m).value();
  };
  for (int m : {-4, 4})
  {
    CAPTURE(m);
    const double coarse = waist(4096, 1e-4, m);
    const double fine = waist(8192, 5e-5, m);
    CHECK(std::abs(fine - coarse) < 2e-3 * std::abs(fine));
  }
}

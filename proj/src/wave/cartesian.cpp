#include "oamlens/wave.hpp"

#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace oamlens::wave
{

namespace
{

// u_m at radius r: linear between cell centres, ~r^|m| inside the first
// centre, zero beyond the last one.
Complex radial_value(const std::vector<Complex>& u, const RadialGrid& grid, int m, double r)
{
  const double s = r / grid.spacing - 0.5;
  if (s < 0.0)
  {
    const double t = r / grid.rho(0);
    return m == 0 ? u[0] : u[0] * std::pow(t, std::abs(m));
  }
  const auto j = static_cast<std::size_t>(s);
  if (j + 1 >= grid.size)
    return j + 1 == grid.size && s == static_cast<double>(j) ? u[j] : Complex(0.0);
  const double f = s - static_cast<double>(j);
  return (1.0 - f) * u[j] + f * u[j + 1];
}

Complex bilinear(const CartesianField& field, double x, double y)
{
  const double half = 0.5 * static_cast<double>(field.n);
  const double cx = x / field.pitch + half - 0.5, cy = y / field.pitch + half - 0.5;
  const double fx0 = std::floor(cx), fy0 = std::floor(cy);
  const auto i0 = static_cast<long>(fy0), j0 = static_cast<long>(fx0);
  const double fx = cx - fx0, fy = cy - fy0;
  const auto n = static_cast<long>(field.n);
  auto val = [&](long i, long j) -> Complex {
    if (i < 0 || j < 0 || i >= n || j >= n)
      return 0.0;
    return field.values[static_cast<std::size_t>(i * n + j)];
  };
  return (1 - fy) * ((1 - fx) * val(i0, j0) + fx * val(i0, j0 + 1)) +
         fy * ((1 - fx) * val(i0 + 1, j0) + fx * val(i0 + 1, j0 + 1));
}

void write_pgm(const std::filesystem::path& path, std::size_t n,
               const std::vector<std::uint16_t>& pixels)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw core::ConfigError("cannot open " + path.string() + " for writing");
  out << "P5\n" << n << ' ' << n << "\n65535\n";
  // PGM is top row first; row 0 of the field has the most negative y, so
  // flip to show +y up.
  for (std::size_t r = n; r-- > 0;)
    for (std::size_t c = 0; c < n; ++c)
    {
      const std::uint16_t v = pixels[r * n + c];
      const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
      out.write(bytes, 2);
    }
  if (!out)
    throw core::ConfigError("failed writing " + path.string());
}

std::filesystem::path write_sidecar(const std::filesystem::path& pgm, nlohmann::json meta)
{
  auto path = pgm;
  path.replace_extension(".json");
  std::ofstream out(path);
  if (!out)
    throw core::ConfigError("cannot open " + path.string() + " for writing");
  out << meta.dump(2) << '\n';
  return path;
}

nlohmann::json base_meta(const CartesianField& field, const char* kind)
{
  return {{"kind", kind},
          {"n", field.n},
          {"pitch_m", field.pitch},
          {"z_m", field.z},
          {"first_row_y_m", (0.5 * static_cast<double>(field.n) - 0.5) * field.pitch},
          {"first_col_x_m", -(0.5 * static_cast<double>(field.n) - 0.5) * field.pitch}};
}

} // namespace

double CartesianField::power() const
{
  double acc = 0.0;
  for (const auto& v : values)
    acc += std::norm(v);
  return acc * pitch * pitch;
}

CartesianField synthesize_2d(const AzimuthalWave& wave, std::size_t n, double pitch)
{
  if (n == 0 || n % 2 != 0)
    throw core::ConfigError("synthesize_2d needs an even, non-zero image size");
  if (!(pitch > 0.0))
    throw core::ConfigError("synthesize_2d needs a positive pitch");
  const double half_width = 0.5 * static_cast<double>(n) * pitch;
  if (half_width > wave.grid.extent() * (1.0 + 1e-12))
    throw core::ConfigError("image half-width exceeds the radial grid extent");

  CartesianField field;
  field.n = n;
  field.pitch = pitch;
  field.z = wave.z;
  field.values.assign(n * n, Complex(0.0));
  const double c = 0.5 * static_cast<double>(n) - 0.5;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double y = (static_cast<double>(i) - c) * pitch;
    for (std::size_t j = 0; j < n; ++j)
    {
      const double x = (static_cast<double>(j) - c) * pitch;
      const double r = std::hypot(x, y);
      const double phi = std::atan2(y, x);
      Complex acc = 0.0;
      for (const auto& [m, u] : wave.components)
        acc += radial_value(u, wave.grid, m, r) * std::polar(1.0, m * phi);
      field.values[i * n + j] = acc;
    }
  }
  return field;
}

OAMSpectrum decompose_azimuthal(const CartesianField& field, int m_max, std::size_t n_phi)
{
  if (m_max < 0)
    throw core::DomainError("decompose_azimuthal needs m_max >= 0");
  if (n_phi < static_cast<std::size_t>(2 * m_max + 1))
    throw core::DomainError("decompose_azimuthal needs n_phi > 2 m_max");
  if (field.n < 4)
    throw core::DomainError("decompose_azimuthal needs at least a 4 x 4 field");

  const std::size_t rings = field.n / 2 - 1;
  std::vector<double> power(2 * m_max + 1, 0.0);
  std::vector<Complex> samples(n_phi);
  for (std::size_t r = 0; r < rings; ++r)
  {
    const double radius = (static_cast<double>(r) + 0.5) * field.pitch;
    for (std::size_t q = 0; q < n_phi; ++q)
    {
      const double phi = 2.0 * core::pi * static_cast<double>(q) / static_cast<double>(n_phi);
      samples[q] = bilinear(field, radius * std::cos(phi), radius * std::sin(phi));
    }
    for (int m = -m_max; m <= m_max; ++m)
    {
      Complex c = 0.0;
      for (std::size_t q = 0; q < n_phi; ++q)
      {
        const double phi = 2.0 * core::pi * static_cast<double>(q) / static_cast<double>(n_phi);
        c += samples[q] * std::polar(1.0, -m * phi);
      }
      c /= static_cast<double>(n_phi);
      power[m + m_max] += std::norm(c) * radius;
    }
  }
  double total = 0.0;
  for (double p : power)
    total += p;
  if (!(total > 0.0))
    throw core::DomainError("decompose_azimuthal: field carries no power");
  OAMSpectrum out;
  for (int m = -m_max; m <= m_max; ++m)
    out[m] = power[m + m_max] / total;
  return out;
}

std::vector<std::filesystem::path> write_intensity_pgm(const CartesianField& field,
                                                       const std::filesystem::path& path)
{
  double peak = 0.0;
  for (const auto& v : field.values)
    peak = std::max(peak, std::norm(v));
  std::vector<std::uint16_t> px(field.values.size(), 0);
  if (peak > 0.0)
    for (std::size_t i = 0; i < px.size(); ++i)
      px[i] = static_cast<std::uint16_t>(std::lround(std::norm(field.values[i]) / peak * 65535.0));
  write_pgm(path, field.n, px);
  auto meta = base_meta(field, "intensity");
  meta["peak_intensity"] = peak;
  meta["mapping"] = "value = round(|psi|^2 / peak_intensity * 65535)";
  return {path, write_sidecar(path, meta)};
}

std::vector<std::filesystem::path> write_phase_pgm(const CartesianField& field,
                                                   const std::filesystem::path& path)
{
  std::vector<std::uint16_t> px(field.values.size(), 0);
  for (std::size_t i = 0; i < px.size(); ++i)
  {
    double ph = std::arg(field.values[i]);
    if (ph < 0.0)
      ph += 2.0 * core::pi;
    const double v = std::floor(ph / (2.0 * core::pi) * 65536.0);
    px[i] = static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0));
  }
  write_pgm(path, field.n, px);
  auto meta = base_meta(field, "phase");
  meta["mapping"] = "value = floor(arg(psi) / (2 pi) * 65536), arg in [0, 2 pi)";
  return {path, write_sidecar(path, meta)};
}

void write_profile_csv(std::ostream& out, const AzimuthalWave& wave, int m)
{
  const auto it = wave.components.find(m);
  if (it == wave.components.end())
    throw core::DomainError("wave has no component m = " + std::to_string(m));
  out << "rho,re_u,im_u\n";
  out.precision(17);
  for (std::size_t j = 0; j < wave.grid.size; ++j)
    out << wave.grid.rho(j) << ',' << it->second[j].real() << ',' << it->second[j].imag() << '\n';
}

void write_spectrum_csv(std::ostream& out, const OAMSpectrum& spectrum)
{
  out << "m,power\n";
  out.precision(17);
  for (const auto& [m, p] : spectrum)
    out << m << ',' << p << '\n';
}

} // namespace oamlens::wave

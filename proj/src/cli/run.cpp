#include "oamlens/cli.hpp"

#include "oamlens/analytic.hpp"
#include "oamlens/constants.hpp"
#include "oamlens/errors.hpp"
#include "oamlens/ray.hpp"
#include "oamlens/simd.hpp"
#include "oamlens/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace oamlens::cli
{

namespace
{

namespace fs = std::filesystem;

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v)
{
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Every file the run writes goes through here so the manifest is complete.
class Outputs
{
public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void text(const std::string& name, const std::string& content)
  {
    std::ofstream out(path(name), std::ios::binary);
    if (!out)
      throw core::ConfigError("cannot write " + path(name).string());
    out << content;
    out.close();
    add(name);
  }

  void add(const std::string& name) { names_.push_back(name); }

  void add_paths(const std::vector<fs::path>& paths)
  {
    for (const auto& p : paths)
      add(p.filename().string());
  }

  Json manifest() const
  {
    Json out = Json::array();
    for (const auto& name : names_)
    {
      const std::string bytes = read_file(path(name));
      out.push_back({{"path", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}});
    }
    out.push_back({{"path", "report.json"}, {"role", "this report"}});
    return out;
  }

private:
  fs::path dir_;
  std::vector<std::string> names_;
};

[[noreturn]] void fail(const std::string& path, const std::string& message)
{
  throw ConfigPathError(path, message);
}

const Json& section(const Json& config, const std::string& key, const std::string& kind)
{
  if (!config.contains(key))
    fail("/" + key, "required for kind '" + kind + "'");
  return config[key];
}

double number_or(const Json& obj, const char* key, double fallback)
{
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

core::BeamParameters make_beam(const Json& config)
{
  const Json& b = config["beam"];
  const bool rel = b.value("relativistic", false);
  try
  {
    return core::make_beam(b["voltage_volts"].get<double>(),
                           rel ? core::Kinematics::Relativistic : core::Kinematics::NonRelativistic);
  }
  catch (const core::DomainError& e)
  {
    fail("/beam/voltage_volts", e.what());
  }
}

fields::AxialFieldModel make_element(const Json& el, const std::string& path,
                                     const fs::path& base)
{
  const std::string kind = el["kind"].get<std::string>();
  const int pol = el.value("polarity", 1);
  auto need = [&](const char* key) {
    if (!el.contains(key))
      fail(path + "/" + key, "required for element kind '" + kind + "'");
    return el[key].get<double>();
  };
  try
  {
    if (kind == "glaser")
    {
      const double b0 = need("B0_tesla");
      const double a = need("a_meters");
      const double b = need("b_meters");
      return fields::AxialFieldModel::glaser(b0, a, b, pol);
    }
    if (kind == "wire_loop")
    {
      const double r = need("R_meters");
      if (el.contains("current_amperes") == el.contains("B0_tesla"))
        fail(path, "wire_loop needs exactly one of B0_tesla or current_amperes");
      if (el.contains("current_amperes"))
        return fields::AxialFieldModel::wire_loop_from_current(el["current_amperes"].get<double>(),
                                                               r, pol);
      return fields::AxialFieldModel::wire_loop_from_b0(el["B0_tesla"].get<double>(), r, pol);
    }
    if (!el.contains("csv_path"))
      fail(path + "/csv_path", "required for element kind 'tabulated'");
    fs::path csv = el["csv_path"].get<std::string>();
    if (csv.is_relative())
      csv = base / csv;
    return fields::load_tabulated_csv(csv, need("b_meters"), pol, number_or(el, "B0_tesla", 0.0));
  }
  catch (const core::DomainError& e)
  {
    fail(path, e.what());
  }
  catch (const core::ConfigError& e)
  {
    fail(path, e.what());
  }
}

analytic::OpticalColumn make_column(const Json& config, const fs::path& base, int polarity = 1)
{
  analytic::OpticalColumn col;
  if (!config.contains("column"))
    return col;
  const Json& c = config["column"];
  if (c.contains("elements"))
    for (std::size_t i = 0; i < c["elements"].size(); ++i)
    {
      const Json& el = c["elements"][i];
      const std::string path = "/column/elements/" + std::to_string(i);
      auto model = make_element(el, path, base);
      if (polarity < 0)
        model = model.with_polarity(-model.polarity());
      col.elements.push_back({model, number_or(el, "z_center_meters", 0.0)});
    }
  if (c.contains("apertures"))
    for (const auto& ap : c["apertures"])
      col.apertures.push_back({ap["z_meters"].get<double>(), ap["radius_meters"].get<double>()});
  try
  {
    col.validate();
  }
  catch (const core::DomainError& e)
  {
    fail("/column", e.what());
  }
  return col;
}

std::vector<double> sample_planes(const Json& config, const std::string& kind)
{
  const Json& p = section(config, "sample_planes", kind);
  std::vector<double> out;
  if (p.contains("list_meters"))
  {
    out = p["list_meters"].get<std::vector<double>>();
    if (!std::is_sorted(out.begin(), out.end()))
      fail("/sample_planes/list_meters", "planes must be sorted");
    return out;
  }
  for (const char* key : {"start_meters", "stop_meters", "count"})
    if (!p.contains(key))
      fail(std::string("/sample_planes/") + key, "required unless list_meters is given");
  const double a = p["start_meters"].get<double>(), b = p["stop_meters"].get<double>();
  const int n = p["count"].get<int>();
  if (b < a)
    fail("/sample_planes/stop_meters", "must not be below start_meters");
  for (int i = 0; i < n; ++i)
    out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return out;
}

std::vector<wave::LGModeSpec> source_modes(const Json& config, const std::string& kind)
{
  const Json& s = section(config, "source", kind);
  std::vector<wave::LGModeSpec> out;
  for (const auto& m : s["modes"])
    out.push_back({m["m"].get<int>(), m["w0_meters"].get<double>(),
                   {number_or(m, "amplitude_re", 1.0), number_or(m, "amplitude_im", 0.0)}});
  return out;
}

wave::RadialGrid make_grid(const Json& config, const std::string& kind)
{
  const Json& w = section(config, "wave", kind);
  const auto n = w["grid_points"].get<std::size_t>();
  return {n, w["rho_max_meters"].get<double>() / static_cast<double>(n)};
}

wave::WaveOptions wave_options(const Json& config, unsigned threads)
{
  wave::WaveOptions o;
  const Json& w = config["wave"];
  o.free_step = number_or(w, "free_step_meters", o.free_step);
  o.steps_per_extent = number_or(w, "steps_per_extent", o.steps_per_extent);
  o.lens_region_factor = number_or(w, "lens_region_factor", o.lens_region_factor);
  o.absorber = w.value("absorber", o.absorber);
  o.absorber_fraction = number_or(w, "absorber_fraction", o.absorber_fraction);
  o.threads = threads;
  return o;
}

wave::AzimuthalWave make_source(const Json& config, const std::string& kind,
                                const core::BeamParameters& beam, double default_z)
{
  const auto modes = source_modes(config, kind);
  const auto grid = make_grid(config, kind);
  const double z = number_or(config["source"], "z_meters", default_z);
  try
  {
    return wave::lg_mode(modes, grid, beam, z);
  }
  catch (const core::ConfigError& e)
  {
    fail("/wave", e.what());
  }
}

// Launch radius for rays standing in for an LG mode: intensity peak for
// m != 0, rms radius for m = 0 (the peak is on axis).
double ray_radius(double w0, int m)
{
  return m == 0 ? w0 / std::sqrt(2.0) : ray::launch_radius(w0, m);
}

std::vector<int> m_values(const Json& config, std::vector<int> fallback)
{
  return config.contains("m_values") ? config["m_values"].get<std::vector<int>>() : fallback;
}

std::string kind_name(analytic::FocalKind k)
{
  switch (k)
  {
  case analytic::FocalKind::Converging:
    return "converging";
  case analytic::FocalKind::Diverging:
    return "diverging";
  case analytic::FocalKind::Infinite:
    return "infinite";
  }
  return "unknown";
}

Json integrals_json(const fields::FieldIntegrals& in)
{
  return {{"int_B1_tesla_meters", in.b1},
          {"int_B1_squared_tesla2_meters", in.b1_squared},
          {"int_B3_tesla_meters", in.b3},
          {"int_B1_B3_tesla2_meters", in.b1_b3}};
}

// ---------------------------------------------------------------- focal

Json run_focal(const Json& config, const RunOptions& opt, Outputs& out)
{
  const auto beam = make_beam(config);
  const auto col = make_column(config, opt.config_dir);
  if (col.elements.empty())
    fail("/column/elements", "focal needs at least one element");
  const auto ms = m_values(config, {0});

  std::ostringstream csv;
  csv << "element,m,f_meters,kind,f_linear_meters,larmor_rad\n";
  Json elements = Json::array();
  for (std::size_t i = 0; i < col.elements.size(); ++i)
  {
    const auto& model = col.elements[i].model;
    const auto summary = analytic::dispersion_summary(model, beam);
    Json table = Json::array();
    for (int m : ms)
    {
      const auto f = analytic::focal_length(model, beam, m);
      const double lin = analytic::approx_focal_length(summary.f0, summary.lambda, m);
      const double larmor = analytic::larmor_phase(model, beam, m);
      csv << i << ',' << m << ',' << fmt(f.value) << ',' << kind_name(f.kind) << ',' << fmt(lin)
          << ',' << fmt(larmor) << '\n';
      table.push_back({{"m", m},
                       {"f_meters", num(f.value)},
                       {"kind", kind_name(f.kind)},
                       {"f_linear_meters", num(lin)},
                       {"larmor_rad", larmor}});
    }
    Json entry = {{"element", i},
                  {"description", analytic::describe({{col.elements[i]}, {}, 0.0, 0.0})},
                  {"f0_meters", num(summary.f0)},
                  {"lambda", summary.lambda},
                  {"beta0", summary.beta0},
                  {"integrals", integrals_json(fields::field_integrals(model))},
                  {"table", table}};
    if (summary.f0 > 0.0 && std::isfinite(summary.f0))
      entry["c3_at_f0_meters"] = analytic::spherical_c3(model, beam, summary.f0);
    elements.push_back(entry);
  }
  out.text("focal_table.csv", csv.str());
  return {{"elements", elements}};
}

// ---------------------------------------------------------------- trace

ray::TraceOptions trace_options(const Json& t, double z0, double z1)
{
  ray::TraceOptions o;
  if (t.value("integrator", std::string("dormand_prince")) == "rk4")
  {
    o.integrator = ray::Integrator::FixedStepRK4;
    if (!t.contains("fixed_step_meters"))
      fail("/trace/fixed_step_meters", "required for integrator 'rk4'");
  }
  o.fixed_step = number_or(t, "fixed_step_meters", 0.0);
  o.rel_tol = number_or(t, "rel_tol", o.rel_tol);
  const int n = t.value("samples", 401);
  for (int i = 0; i < n; ++i)
    o.sample_planes.push_back(z0 + (z1 - z0) * i / (n - 1));
  return o;
}

Json crossing_json(const ray::FocalCrossing& c)
{
  if (!c.found)
    return {{"found", false}};
  return {{"found", true}, {"z_meters", c.z}, {"rho_meters", c.rho}};
}

Json trajectories_json(const std::vector<ray::RayState>& starts,
                       const std::vector<ray::RayTrajectory>& trajs)
{
  Json rays = Json::array();
  for (std::size_t i = 0; i < trajs.size(); ++i)
  {
    const auto& t = trajs[i];
    rays.push_back({{"m", starts[i].m},
                    {"rho0_meters", starts[i].rho},
                    {"slope0_rad", starts[i].rho_prime},
                    {"final_rho_meters", t.samples.back().rho},
                    {"final_slope_rad", t.samples.back().rho_prime},
                    {"focal_crossing", crossing_json(ray::focal_crossing(t))},
                    {"accepted_steps", t.accepted_steps},
                    {"rejected_steps", t.rejected_steps},
                    {"error_estimate_meters", t.error_estimate},
                    {"beyond_dispersion_length", t.beyond_dispersion_length}});
  }
  return rays;
}

Json run_trace(const Json& config, const RunOptions& opt, Outputs& out)
{
  const auto beam = make_beam(config);
  const auto col = make_column(config, opt.config_dir);
  const Json& t = section(config, "trace", "trace");
  const double z0 = t["z_start_meters"].get<double>(), z1 = t["z_end_meters"].get<double>();
  if (!(z1 > z0))
    fail("/trace/z_end_meters", "must exceed z_start_meters");

  std::vector<ray::RayState> starts;
  if (t.contains("rays"))
  {
    for (const auto& r : t["rays"])
      starts.push_back({z0, r["rho_meters"].get<double>(), number_or(r, "slope_rad", 0.0),
                        r["m"].get<int>()});
  }
  else if (config.contains("source"))
  {
    for (const auto& mode : source_modes(config, "trace"))
      starts.push_back({z0, ray_radius(mode.w0, mode.m), 0.0, mode.m});
  }
  else
  {
    fail("/trace/rays", "give rays or a source to launch from");
  }

  const auto options = trace_options(t, z0, z1);
  const auto trajs = ray::trace_many(starts, col, beam, z1, options, opt.threads);
  std::ostringstream csv;
  ray::write_trajectory_csv(csv, trajs);
  out.text("trajectories.csv", csv.str());
  return {{"column", analytic::describe(col)}, {"rays", trajectories_json(starts, trajs)}};
}

// ---------------------------------------------------------------- propagate

void write_images(const wave::AzimuthalWave& w, const Json& images, std::size_t index,
                  Outputs& out)
{
  const auto n = images["n_pixels"].get<std::size_t>();
  const double pitch = images["pitch_meters"].get<double>();
  wave::CartesianField field;
  try
  {
    field = wave::synthesize_2d(w, n, pitch);
  }
  catch (const core::ConfigError& e)
  {
    fail("/propagate/images", e.what());
  }
  char stem[32];
  std::snprintf(stem, sizeof stem, "%03zu", index);
  out.add_paths(wave::write_intensity_pgm(field, out.path(std::string("intensity_") + stem + ".pgm")));
  out.add_paths(wave::write_phase_pgm(field, out.path(std::string("phase_") + stem + ".pgm")));
}

Json run_propagate(const Json& config, const RunOptions& opt, Outputs& out)
{
  const auto beam = make_beam(config);
  const auto col = make_column(config, opt.config_dir);
  const auto planes = sample_planes(config, "propagate");
  const auto src = make_source(config, "propagate", beam, planes.front());
  if (planes.front() < src.z)
    fail("/sample_planes", "planes must not precede the source plane");
  const Json settings = config.value("propagate", Json::object());
  const auto options = wave_options(config, opt.threads);

  const auto result = wave::propagate(src, col, planes, options);

  std::ostringstream spectra, rms;
  spectra << "z_meters,m,fraction\n";
  rms << "z_meters,m,rms_radius_meters\n";
  for (const auto& s : result.snapshots)
  {
    for (const auto& [m, p] : wave::oam_spectrum(s.wave))
      spectra << fmt(s.z) << ',' << m << ',' << fmt(p) << '\n';
    for (const auto& [m, u] : s.wave.components)
      rms << fmt(s.z) << ',' << m << ',' << fmt(std::sqrt(s.wave.mean_square_radius(m))) << '\n';
  }
  out.text("spectra.csv", spectra.str());
  out.text("rms.csv", rms.str());

  if (settings.value("profiles", false))
    for (std::size_t i = 0; i < result.snapshots.size(); ++i)
      for (const auto& [m, u] : result.snapshots[i].wave.components)
      {
        std::ostringstream csv;
        wave::write_profile_csv(csv, result.snapshots[i].wave, m);
        char name[64];
        std::snprintf(name, sizeof name, "profile_%03zu_m%d.csv", i, m);
        out.text(name, csv.str());
      }

  if (settings.contains("images"))
  {
    const Json& images = settings["images"];
    const auto every = images.value("every", std::size_t{1});
    for (std::size_t i = 0; i < result.snapshots.size(); i += every)
      write_images(result.snapshots[i].wave, images, i, out);
  }

  // Per-m focus: wave waist, thin-lens prediction, ray cross-check.
  const bool ray_check = settings.value("ray_check", !col.elements.empty());
  std::map<int, double> w0_of;
  for (const auto& mode : source_modes(config, "propagate"))
    w0_of[mode.m] = mode.w0;
  Json foci = Json::array();
  for (const auto& [m, u] : src.components)
  {
    Json entry = {{"m", m}};
    const auto waist = wave::waist_position(result.snapshots, m);
    entry["waist_z_meters"] = waist ? Json(*waist) : Json(nullptr);
    if (col.elements.size() == 1)
    {
      const auto f = analytic::focal_length(col.elements[0].model, beam, m);
      entry["thin_lens_focus_z_meters"] = num(col.elements[0].z_center + f.value);
    }
    if (ray_check)
    {
      ray::RayState start{src.z, ray_radius(w0_of.at(m), m), 0.0, m};
      ray::TraceOptions topt;
      topt.sample_planes = {src.z, planes.back()};
      const auto traj = ray::trace(start, col, beam, planes.back(), topt);
      entry["ray_focal_crossing"] = crossing_json(ray::focal_crossing(traj));
    }
    foci.push_back(entry);
  }

  return {{"column", analytic::describe(col)},
          {"source_z_meters", src.z},
          {"steps", result.steps},
          {"absorbed_power", result.absorbed},
          {"final_norm", result.final_wave.norm()},
          {"final_z_meters", result.final_wave.z},
          {"foci", foci},
          {"warnings", result.warnings}};
}

// ---------------------------------------------------------------- stack

Json run_stack(const Json& config, const RunOptions& opt, Outputs& out)
{
  const auto beam = make_beam(config);
  const auto col = make_column(config, opt.config_dir);
  const Json& s = section(config, "stack", "stack");
  const int n_pairs = s["n_pairs"].get<int>();

  double lambda = 0.0, f0 = 0.0;
  if (!col.elements.empty())
  {
    const auto summary = analytic::dispersion_summary(col.elements[0].model, beam);
    lambda = summary.lambda;
    f0 = summary.f0;
  }
  if (s.contains("lambda"))
    lambda = s["lambda"].get<double>();
  else if (col.elements.empty())
    fail("/stack/lambda", "required when the column has no elements");
  if (s.contains("f0_meters"))
    f0 = s["f0_meters"].get<double>();
  else if (col.elements.empty())
    f0 = 1.0;
  const auto ms = m_values(config, {-1, 1});

  std::ostringstream csv;
  csv << "m,n_pairs,per_pair_exact,per_pair_linear,exact,approx,abcd,approx_vs_abcd,flag\n";
  Json table = Json::array();
  std::map<int, double> final_abcd, final_approx;
  for (int m : ms)
    for (int n = 1; n <= n_pairs; ++n)
    {
      const auto mag = analytic::afocal_stack_magnification(lambda, m, n);
      const double abcd = analytic::afocal_stack_matrix(f0, lambda, m, n).a;
      const double rel = mag.approx / abcd - 1.0;
      const std::string flag = std::abs(rel) <= 0.03 ? "within_3pct" : "exceeds_3pct";
      csv << m << ',' << n << ',' << fmt(mag.per_pair_exact) << ',' << fmt(mag.per_pair_linear)
          << ',' << fmt(mag.exact) << ',' << fmt(mag.approx) << ',' << fmt(abcd) << ','
          << fmt(rel) << ',' << flag << '\n';
      if (n == n_pairs)
      {
        table.push_back({{"m", m},
                         {"n_pairs", n},
                         {"per_pair_exact", mag.per_pair_exact},
                         {"per_pair_linear", mag.per_pair_linear},
                         {"exact", mag.exact},
                         {"approx", mag.approx},
                         {"abcd", abcd},
                         {"approx_vs_abcd", rel},
                         {"flag", flag}});
        final_abcd[m] = abcd;
        final_approx[m] = mag.approx;
      }
    }
  out.text("stack_table.csv", csv.str());

  Json result = {{"lambda", lambda}, {"f0_meters", f0}, {"n_pairs", n_pairs}, {"final", table}};
  Json ratios = Json::array();
  for (int m : ms)
    if (m > 0 && final_abcd.count(-m))
      ratios.push_back({{"m", m},
                        {"abcd_ratio", std::abs(final_abcd[m] / final_abcd[-m])},
                        {"approx_ratio", std::abs(final_approx[m] / final_approx[-m])}});
  result["plus_minus_ratios"] = ratios;

  if (s.contains("variable_spacing_s"))
  {
    std::ostringstream vcsv;
    vcsv << "s,m,formula,abcd,pole\n";
    Json vs = Json::array();
    for (double sv : s["variable_spacing_s"].get<std::vector<double>>())
      for (int m : ms)
      {
        const auto formula = analytic::variable_spacing_magnification(lambda, m, sv);
        const auto device = analytic::variable_spacing_device(f0, lambda, m, sv);
        const auto img = analytic::image_solve(device.system, device.object_distance);
        const double abcd = img.kind == analytic::ImageKind::Finite
                                ? img.magnification
                                : std::numeric_limits<double>::infinity();
        vcsv << fmt(sv) << ',' << m << ',' << fmt(formula.value) << ',' << fmt(abcd) << ','
             << (formula.pole ? 1 : 0) << '\n';
        vs.push_back({{"s", sv},
                      {"m", m},
                      {"formula", num(formula.value)},
                      {"abcd", num(abcd)},
                      {"pole", formula.pole}});
      }
    out.text("variable_spacing.csv", vcsv.str());
    result["variable_spacing"] = vs;
  }

  if (s.value("trace_rays", false))
  {
    if (col.elements.empty())
      fail("/stack/trace_rays", "needs a lens element to build the stack");
    const auto& base = col.elements[0];
    const double spacing = 2.0 * f0;
    const auto stack = analytic::alternating_stack(base.model, 2 * n_pairs, base.z_center, spacing,
                                                   base.model.polarity());
    std::vector<ray::RayState> starts;
    for (int m : ms)
    {
      // far enough out that the centrifugal term stays negligible
      const double rho0 = m == 0 ? 1e-6 : 20.0 * std::sqrt(std::abs(m) * f0 / beam.wavenumber);
      starts.push_back({stack.object_z, rho0, 0.0, m});
    }
    ray::TraceOptions topt;
    const int samples = 40 * n_pairs + 1;
    for (int i = 0; i < samples; ++i)
      topt.sample_planes.push_back(stack.object_z +
                                   (stack.image_z - stack.object_z) * i / (samples - 1));
    const auto trajs = ray::trace_many(starts, stack, beam, stack.image_z, topt, opt.threads);
    std::ostringstream tcsv;
    ray::write_trajectory_csv(tcsv, trajs);
    out.text("stack_trajectories.csv", tcsv.str());
    result["stack_rays"] = trajectories_json(starts, trajs);
  }
  return result;
}

// ---------------------------------------------------------------- dichroism

Json run_dichroism(const Json& config, const RunOptions& opt, Outputs& out)
{
  const auto beam = make_beam(config);
  const auto col_plus = make_column(config, opt.config_dir, +1);
  const auto col_minus = make_column(config, opt.config_dir, -1);
  if (col_plus.elements.size() != 1)
    fail("/column/elements", "dichroism needs exactly one lens element");
  const Json d = config.value("dichroism", Json::object());
  const int target = d.value("target_m", 1);
  const auto src = make_source(config, "dichroism", beam, 0.0);
  if (!src.components.count(target) || !src.components.count(-target))
    fail("/source/modes", "source must contain m = +-target_m");

  const auto& lens = col_plus.elements[0];
  const auto f_target = analytic::focal_length(lens.model, beam, target);
  double z_ap = lens.z_center + f_target.value;
  if (d.contains("aperture_z_meters"))
    z_ap = d["aperture_z_meters"].get<double>();
  else if (f_target.kind != analytic::FocalKind::Converging)
    fail("/dichroism/aperture_z_meters", "target mode does not focus; give the plane");
  if (!(z_ap > src.z))
    fail("/dichroism/aperture_z_meters", "aperture must lie after the source plane");

  const auto options = wave_options(config, opt.threads);
  const auto plus = wave::propagate(src, col_plus, {z_ap}, options);
  const auto minus = wave::propagate(src, col_minus, {z_ap}, options);

  double radius = 0.0;
  if (d.contains("aperture_radius_meters"))
    radius = d["aperture_radius_meters"].get<double>();
  else
    radius = number_or(d, "aperture_radius_spots", 2.0) *
             std::sqrt(plus.final_wave.mean_square_radius(target));

  std::ostringstream csv;
  csv << "polarity,m,transmission,transmitted_power\n";
  Json per_polarity = Json::array();
  for (const auto* run : {&plus, &minus})
  {
    const int pol = run == &plus ? 1 : -1;
    const auto ap = wave::aperture_transmission(run->final_wave, radius);
    Json modes = Json::array();
    for (const auto& [m, t] : ap.transmission)
    {
      const double power = ap.transmitted.component_power(m);
      csv << pol << ',' << m << ',' << fmt(t) << ',' << fmt(power) << '\n';
      modes.push_back({{"m", m}, {"transmission", t}, {"transmitted_power", power}});
    }
    const double pp = ap.transmitted.component_power(target);
    const double pm = ap.transmitted.component_power(-target);
    const double contrast = (pp - pm) / (pp + pm);
    per_polarity.push_back({{"polarity", pol},
                            {"contrast", contrast},
                            {"favours_m", contrast > 0 ? target : -target},
                            {"modes", modes},
                            {"absorbed_power", run->absorbed},
                            {"warnings", run->warnings}});
  }
  out.text("dichroism.csv", csv.str());
  const double cp = per_polarity[0]["contrast"].get<double>();
  const double cm = per_polarity[1]["contrast"].get<double>();
  return {{"target_m", target},
          {"aperture_z_meters", z_ap},
          {"aperture_radius_meters", radius},
          {"polarities", per_polarity},
          {"contrast_symmetry_residual",
           std::abs(cp + cm) / std::max(std::abs(cp), std::abs(cm))}};
}

// ---------------------------------------------------------------- spectrum

Json run_spectrum(const Json& config, const RunOptions& opt, Outputs& out)
{
  const auto beam = make_beam(config);
  const auto col = make_column(config, opt.config_dir);
  const auto planes = sample_planes(config, "spectrum");
  const auto src = make_source(config, "spectrum", beam, planes.front());
  const auto result = wave::propagate(src, col, planes, wave_options(config, opt.threads));
  const Json s = config.value("spectrum", Json::object());

  std::ostringstream csv;
  csv << "z_meters,m,fraction\n";
  Json per_plane = Json::array();
  for (const auto& snap : result.snapshots)
  {
    const auto spec = wave::oam_spectrum(snap.wave);
    Json entry = {{"z_meters", snap.z}};
    Json fractions = Json::object();
    for (const auto& [m, p] : spec)
    {
      csv << fmt(snap.z) << ',' << m << ',' << fmt(p) << '\n';
      fractions[std::to_string(m)] = p;
    }
    entry["fractions"] = fractions;
    per_plane.push_back(entry);
  }
  out.text("spectrum.csv", csv.str());
  Json result_json = {{"planes", per_plane}, {"absorbed_power", result.absorbed}};

  if (s.contains("images"))
  {
    const Json& images = s["images"];
    int m_max = 0;
    for (const auto& [m, u] : src.components)
      m_max = std::max(m_max, std::abs(m));
    m_max = s.value("m_max", m_max + 2);
    wave::CartesianField field;
    try
    {
      field = wave::synthesize_2d(result.final_wave, images["n_pixels"].get<std::size_t>(),
                                  images["pitch_meters"].get<double>());
    }
    catch (const core::ConfigError& e)
    {
      fail("/spectrum/images", e.what());
    }
    out.add_paths(wave::write_intensity_pgm(field, out.path("final_intensity.pgm")));
    out.add_paths(wave::write_phase_pgm(field, out.path("final_phase.pgm")));
    const auto spec2d = wave::decompose_azimuthal(field, m_max);
    const auto radial = wave::oam_spectrum(result.final_wave);
    std::ostringstream dcsv;
    dcsv << "m,fraction_2d,fraction_radial\n";
    double worst = 0.0;
    Json rows = Json::array();
    for (const auto& [m, p] : spec2d)
    {
      const double r = radial.count(m) ? radial.at(m) : 0.0;
      worst = std::max(worst, std::abs(p - r));
      dcsv << m << ',' << fmt(p) << ',' << fmt(r) << '\n';
      rows.push_back({{"m", m}, {"fraction_2d", p}, {"fraction_radial", r}});
    }
    out.text("decomposition.csv", dcsv.str());
    result_json["decomposition"] = rows;
    result_json["decomposition_max_abs_difference"] = worst;
    result_json["power_2d"] = field.power();
    result_json["power_radial"] = result.final_wave.norm();
  }
  return result_json;
}

} // namespace

Json run(const Json& config, const RunOptions& options)
{
  const auto issues = validate(config, experiment_schema());
  if (!issues.empty())
    throw ConfigPathError(issues.front().path, issues.front().message);

  Outputs out(options.out_dir);
  const std::string kind = config["kind"].get<std::string>();
  Json results;
  if (kind == "focal")
    results = run_focal(config, options, out);
  else if (kind == "trace")
    results = run_trace(config, options, out);
  else if (kind == "propagate")
    results = run_propagate(config, options, out);
  else if (kind == "stack")
    results = run_stack(config, options, out);
  else if (kind == "dichroism")
    results = run_dichroism(config, options, out);
  else
    results = run_spectrum(config, options, out);

  const auto beam = make_beam(config);
  Json report = {
      {"tool", "oamlens"},
      {"version", version},
      {"constants_hash", hex64(core::constants_hash())},
      {"simd", simd::isa_name(simd::active_kernels().isa)},
      {"kind", kind},
      {"inputs", config},
      {"resolved_beam",
       {{"voltage_volts", beam.accelerating_voltage},
        {"kinetic_energy_joules", beam.kinetic_energy},
        {"wavelength_meters", beam.wavelength},
        {"wavenumber_per_meter", beam.wavenumber},
        {"kinematics",
         beam.kinematics == core::Kinematics::Relativistic ? "relativistic" : "non_relativistic"}}},
      {"results", results},
  };
  report["manifest"] = out.manifest();
  std::ofstream rep(options.out_dir / "report.json", std::ios::binary);
  rep << report.dump(2) << '\n';
  if (!rep)
    throw core::ConfigError("cannot write report.json");
  return report;
}

} // namespace oamlens::cli

#include "oamlens/cli.hpp"

#include "oamlens/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <random>

namespace oamlens::cli
{

namespace
{

namespace fs = std::filesystem;

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Runs the config a second time into a scratch directory and compares every
// manifest entry and the report byte for byte.
bool seed_check(const Json& config, const RunOptions& options, const Json& first)
{
  std::random_device rd;
  const fs::path scratch =
      fs::temp_directory_path() / ("oamlens_seed_check_" + std::to_string(rd()));
  RunOptions again = options;
  again.out_dir = scratch;
  bool same = false;
  try
  {
    const Json second = run(config, again);
    same = second == first &&
           slurp(options.out_dir / "report.json") == slurp(scratch / "report.json");
    for (const auto& entry : first["manifest"])
    {
      const std::string name = entry["path"].get<std::string>();
      same = same && slurp(options.out_dir / name) == slurp(scratch / name);
    }
  }
  catch (...)
  {
    fs::remove_all(scratch);
    throw;
  }
  fs::remove_all(scratch);
  return same;
}

} // namespace

int main_entry(int argc, char** argv)
{
  CLI::App app{"Paraxial OAM electron-optics experiments"};
  app.set_version_flag("--version", version);
  std::string config_path;
  std::string out_dir = "out";
  unsigned threads = 1;
  bool check = false;
  app.add_option("--config", config_path, "experiment JSON")->required();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_flag("--seed-check", check, "run twice and require byte-identical outputs");
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    return app.exit(e) == 0 ? ExitOk : ExitUsage;
  }

  Json config;
  {
    std::ifstream in(config_path);
    if (!in)
    {
      std::cerr << "config error: cannot open " << config_path << '\n';
      return ExitConfig;
    }
    try
    {
      config = Json::parse(in);
    }
    catch (const Json::parse_error& e)
    {
      std::cerr << "config error: " << config_path << " is not valid JSON (" << e.what() << ")\n";
      return ExitConfig;
    }
  }

  const auto issues = validate(config, experiment_schema());
  if (!issues.empty())
  {
    for (const auto& issue : issues)
      std::cerr << "config error at " << (issue.path.empty() ? "/" : issue.path) << ": "
                << issue.message << '\n';
    return ExitConfig;
  }

  RunOptions options;
  options.out_dir = out_dir;
  options.threads = threads;
  options.config_dir = fs::path(config_path).parent_path();
  if (options.config_dir.empty())
    options.config_dir = ".";
  try
  {
    const Json report = run(config, options);
    if (check && !seed_check(config, options, report))
    {
      std::cerr << "seed check failed: a second run produced different outputs\n";
      return ExitNumerical;
    }
    std::cout << "wrote " << (options.out_dir / "report.json").string() << " ("
              << report["manifest"].size() << " files)\n";
    if (check)
      std::cout << "seed check passed\n";
    return ExitOk;
  }
  catch (const ConfigPathError& e)
  {
    std::cerr << "config error at " << (e.path().empty() ? "/: " : "") << e.what() << '\n';
    return ExitConfig;
  }
  catch (const core::ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitConfig;
  }
  catch (const core::DomainError& e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitConfig;
  }
  catch (const core::NumericalError& e)
  {
    std::cerr << "numerical error: " << e.what();
    if (e.error_estimate() != 0.0)
      std::cerr << " (best estimate " << e.estimate() << ", error estimate " << e.error_estimate()
                << ")";
    std::cerr << '\n';
    return ExitNumerical;
  }
  catch (const std::exception& e)
  {
    std::cerr << "numerical error: " << e.what() << '\n';
    return ExitNumerical;
  }
}

} // namespace oamlens::cli

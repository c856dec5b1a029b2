#include "oamlens/cli.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace oamlens;
using cli::Json;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("oamlens_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json glaser_focal()
{
  return Json::parse(R"({
    "kind": "focal",
    "beam": {"voltage_volts": 80000},
    "column": {"elements": [{"kind": "glaser", "B0_tesla": 2.0, "a_meters": 1e-5,
                             "b_meters": 1e-7}]},
    "m_values": [-2, -1, 0, 1, 2]
  })");
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Captured
{
  int code = 0;
  std::string err;
};

Captured run_main(std::vector<std::string> args)
{
  args.insert(args.begin(), "oamlens");
  std::vector<char*> argv;
  for (auto& a : args)
    argv.push_back(a.data());
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  return {code, err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

} // namespace

TEST_CASE("validator reports JSON pointer paths")
{
  const Json schema = Json::parse(R"({
    "type": "object", "required": ["a"], "additionalProperties": false,
    "properties": {
      "a": {"type": "integer", "minimum": 1},
      "b": {"type": "array", "items": {"$ref": "#/$defs/item"}},
      "c": {"enum": ["x", "y"]}
    },
    "$defs": {"item": {"type": "object", "properties": {"v": {"type": "number", "exclusiveMinimum": 0}}}}
  })");
  CHECK(cli::validate(Json::parse(R"({"a": 2})"), schema).empty());
  CHECK(cli::validate(Json::parse(R"({"a": 2.0})"), schema).empty());

  auto issues = cli::validate(Json::parse(R"({"b": [{"v": 1}, {"v": -1}], "d": 1, "c": "z"})"),
                              schema);
  std::set<std::string> paths;
  for (const auto& i : issues)
    paths.insert(i.path);
  CHECK(paths.count("/a"));
  CHECK(paths.count("/b/1/v"));
  CHECK(paths.count("/d"));
  CHECK(paths.count("/c"));

  issues = cli::validate(Json::parse(R"({"a": "one"})"), schema);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].path == "/a");
  CHECK(issues[0].message.find("integer") != std::string::npos);
  CHECK(cli::validate(Json::parse(R"({"a": 0})"), schema).size() == 1);
}

TEST_CASE("shipped recipes satisfy the embedded schema")
{
  const fs::path dir = fs::path(OAMLENS_SOURCE_DIR) / "recipes";
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(dir))
  {
    CAPTURE(entry.path().string());
    const Json doc = Json::parse(slurp(entry.path()));
    CHECK(cli::validate(doc, cli::experiment_schema()).empty());
    ++count;
  }
  CHECK(count >= 4);
}

TEST_CASE("focal run reports f0 and Lambda")
{
  const auto dir = scratch("focal");
  const Json report = cli::run(glaser_focal(), {dir, 1, "."});
  const auto& el = report["results"]["elements"][0];
  CHECK(el["f0_meters"].get<double>() == doctest::Approx(57.9e-3).epsilon(1e-3));
  CHECK(el["lambda"].get<double>() == doctest::Approx(0.066).epsilon(2e-2));
  CHECK(el["table"].size() == 5);
  CHECK(report["constants_hash"].get<std::string>().size() == 16);
  CHECK(fs::exists(dir / "focal_table.csv"));
  CHECK(slurp(dir / "focal_table.csv").rfind("element,m,f_meters,kind,f_linear_meters,larmor_rad\n", 0) ==
        0);
}

TEST_CASE("empty column trace gives straight lines")
{
  const auto dir = scratch("trace");
  const Json config = Json::parse(R"({
    "kind": "trace",
    "beam": {"voltage_volts": 80000},
    "trace": {"z_start_meters": 0, "z_end_meters": 0.1, "samples": 11,
              "rays": [{"m": 0, "rho_meters": 1e-6, "slope_rad": 1e-5},
                       {"m": 0, "rho_meters": -2e-6}]}
  })");
  const Json report = cli::run(config, {dir, 2, "."});
  std::istringstream csv(slurp(dir / "trajectories.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "z,rho,rho_prime,m");
  std::size_t rows = 0;
  while (std::getline(csv, line))
  {
    double z, rho, slope;
    int m;
    char c;
    std::istringstream row(line);
    row >> z >> c >> rho >> c >> slope >> c >> m;
    const double expect = slope == 0.0 ? -2e-6 : 1e-6 + 1e-5 * z;
    CHECK(rho == doctest::Approx(expect).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 22);
  CHECK_FALSE(report["results"]["rays"][0]["focal_crossing"]["found"].get<bool>());
}

TEST_CASE("stack run flags the exponential law against the matrices")
{
  const auto dir = scratch("stack");
  const Json config = Json::parse(R"({
    "kind": "stack", "beam": {"voltage_volts": 80000}, "m_values": [-1, 1],
    "stack": {"n_pairs": 20, "lambda": 0.066, "f0_meters": 0.058}
  })");
  const Json report = cli::run(config, {dir, 1, "."});
  for (const auto& row : report["results"]["final"])
  {
    const double exact = row["exact"].get<double>(), abcd = row["abcd"].get<double>();
    CHECK(exact == doctest::Approx(abcd).epsilon(1e-12));
    CHECK(row["flag"].get<std::string>() == "within_3pct");
  }
  const std::string table = slurp(dir / "stack_table.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 41);
}

TEST_CASE("manifest lists every written file and reruns are byte identical")
{
  const auto a = scratch("det_a"), b = scratch("det_b");
  const Json config = Json::parse(R"({
    "kind": "spectrum", "beam": {"voltage_volts": 80000},
    "source": {"modes": [{"m": -1, "w0_meters": 1e-6}, {"m": 2, "w0_meters": 1e-6, "amplitude_im": 1.5}]},
    "wave": {"grid_points": 512, "rho_max_meters": 1.6e-5, "free_step_meters": 0.05},
    "sample_planes": {"list_meters": [0.0, 0.2]},
    "spectrum": {"images": {"n_pixels": 128, "pitch_meters": 1.25e-7}}
  })");
  const Json ra = cli::run(config, {a, 1, "."});
  const Json rb = cli::run(config, {b, 3, "."});
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));

  std::set<std::string> listed, on_disk;
  for (const auto& e : ra["manifest"])
    listed.insert(e["path"].get<std::string>());
  for (const auto& e : fs::directory_iterator(a))
    on_disk.insert(e.path().filename().string());
  CHECK(listed == on_disk);
  CHECK(ra["results"]["decomposition_max_abs_difference"].get<double>() < 1e-3);
}

TEST_CASE("exit codes")
{
  const auto dir = scratch("exit");
  // malformed JSON
  auto cfg = write_config(dir, "{ not json");
  auto r = run_main({"--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);

  // schema violation names the field
  cfg = write_config(dir, R"({"kind": "focal", "beam": {"voltage_volts": -5}})");
  r = run_main({"--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/beam/voltage_volts") != std::string::npos);

  // semantic violation names the field
  cfg = write_config(dir, R"({"kind": "focal", "beam": {"voltage_volts": 80000},
                              "column": {"elements": [{"kind": "glaser", "B0_tesla": 2}]}})");
  r = run_main({"--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/column/elements/0/a_meters") != std::string::npos);

  // grid too coarse for the source
  cfg = write_config(dir, R"({"kind": "propagate", "beam": {"voltage_volts": 80000},
      "source": {"modes": [{"m": 0, "w0_meters": 1e-6}]},
      "wave": {"grid_points": 16, "rho_max_meters": 1e-5},
      "sample_planes": {"list_meters": [0.0]}})");
  r = run_main({"--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("w0/16") != std::string::npos);

  // crude fixed-step ray with m != 0 driven at the axis fails numerically
  cfg = write_config(dir, R"({"kind": "trace", "beam": {"voltage_volts": 80000},
      "trace": {"z_start_meters": 0, "z_end_meters": 0.1, "integrator": "rk4",
                "fixed_step_meters": 0.01,
                "rays": [{"m": 1, "rho_meters": 1e-9, "slope_rad": -1e-3}]}})");
  r = run_main({"--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("numerical error") != std::string::npos);

  // good run with the determinism check
  cfg = dir / "focal.json";
  std::ofstream(cfg) << glaser_focal().dump();
  r = run_main({"--config", cfg.string(), "--out", (dir / "ok").string(), "--seed-check"});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "ok" / "report.json"));

  r = run_main({"--out", (dir / "o").string()});
  CHECK(r.code == 1);
}

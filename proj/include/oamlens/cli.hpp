#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace oamlens::cli
{

using Json = nlohmann::json;

inline constexpr const char* version = "0.1.0";

enum ExitCode : int
{
  ExitOk = 0,
  ExitUsage = 1,
  ExitConfig = 2,
  ExitNumerical = 3,
};

/// The experiment schema compiled into the binary.
const Json& experiment_schema();

struct SchemaIssue
{
  std::string path; // JSON pointer into the document, "" for the root
  std::string message;
};

/// Validates `doc` against the subset of JSON Schema used by the experiment
/// schema: type, enum, properties, required, additionalProperties (false),
/// items, minItems, minimum, maximum, exclusiveMinimum and local $ref.
std::vector<SchemaIssue> validate(const Json& doc, const Json& schema);

/// Thrown for invalid configurations; `path` is a JSON pointer.
class ConfigPathError : public std::runtime_error
{
public:
  ConfigPathError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path))
  {
  }
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

struct RunOptions
{
  std::filesystem::path out_dir = "out";
  unsigned threads = 1;
  /// Directory for relative paths inside the config (tabulated CSVs).
  std::filesystem::path config_dir = ".";
};

/// Runs one experiment, writes its files and report.json into out_dir and
/// returns the report. Throws ConfigPathError for schema or semantic
/// violations; numerical failures propagate as core::NumericalError.
Json run(const Json& config, const RunOptions& options);

/// Command-line entry point. Returns the process exit code.
int main_entry(int argc, char** argv);

} // namespace oamlens::cli

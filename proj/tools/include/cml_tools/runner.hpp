#pragma once

// Config-driven experiment runner behind the cmlbench CLI.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cml::tools {

using json = nlohmann::json;

inline constexpr const char* kToolName = "cmlbench";
inline constexpr const char* kToolVersion = "0.1.0";

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what) {}
};

enum ExitCode : int { kOk = 0, kCertificationFailed = 1, kBadConfig = 2, kRuntimeError = 3 };

const std::vector<std::string>& experiment_kinds();
const std::vector<std::string>& recipe_names();

/// Parameter defaults of one experiment kind.
json default_params(const std::string& kind);

/// {"kind", "params", "seed", "format"} for a named recipe.
json recipe_config(const std::string& name);

/// Validates a config against the schema of its kind and fills in every
/// default. Unknown fields and wrong types raise ConfigError.
json resolve_config(const json& config);

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

struct Outcome {
  bool passed = true;
  json summary = json::object();
  std::vector<Series> series;
};

struct RunOptions {
  unsigned threads = 0;
};

/// Builds the typed experiment from a resolved config (may throw
/// ConfigError) and returns a thunk that runs it.
std::function<Outcome(const RunOptions&)> prepare(const json& resolved);

std::uint64_t config_hash(const json& resolved);
json artifact_header(const json& resolved);

/// Writes <kind>_summary.json and one file per series (CSV or JSON).
std::vector<std::filesystem::path> write_artifacts(const json& resolved, const Outcome& outcome,
                                                   const std::filesystem::path& out_dir);

struct Invocation {
  json config;                         // possibly partial
  std::optional<std::uint64_t> seed;   // overrides config.seed
  std::optional<std::string> format;   // overrides config.format
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;
};

/// Resolve, run and write artifacts. Nothing is written unless the config
/// is valid and the run completes. Returns an ExitCode.
int run_experiment(const Invocation& inv, std::ostream& log);

}  // namespace cml::tools

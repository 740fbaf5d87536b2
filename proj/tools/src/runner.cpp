#include "cml_tools/runner.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cml::tools {
namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return ec == std::errc() ? std::string(buf, end) : v.dump();
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return v.dump();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::uint64_t config_hash(const json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json artifact_header(const json& resolved) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"config_hash", hex64(config_hash(resolved))},
          {"seed", resolved.at("seed")},
          {"config", resolved}};
}

std::vector<std::filesystem::path> write_artifacts(const json& resolved, const Outcome& outcome,
                                                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string kind = resolved.at("kind");
  const json header = artifact_header(resolved);
  std::vector<std::filesystem::path> written;

  json summary = {{"header", header}, {"passed", outcome.passed}, {"summary", outcome.summary}};
  auto path = out_dir / (kind + "_summary.json");
  write_text(path, summary.dump(2) + "\n");
  written.push_back(path);

  const bool as_json = resolved.at("format") == "json";
  for (const auto& s : outcome.series) {
    if (as_json) {
      json doc = {{"header", header}, {"columns", s.columns}, {"rows", json::array()}};
      for (const auto& row : s.rows) doc["rows"].push_back(row);
      path = out_dir / (kind + "_" + s.name + ".json");
      write_text(path, doc.dump(1) + "\n");
    } else {
      std::ostringstream csv;
      csv << "# tool=" << kToolName << " version=" << kToolVersion << " config_hash=" << header["config_hash"].get<std::string>()
          << " seed=" << resolved.at("seed").dump() << "\n";
      csv << "# config=" << resolved.dump() << "\n";
      for (std::size_t k = 0; k < s.columns.size(); ++k) csv << (k ? "," : "") << s.columns[k];
      csv << "\n";
      for (const auto& row : s.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << csv_cell(row[k]);
        csv << "\n";
      }
      path = out_dir / (kind + "_" + s.name + ".csv");
      write_text(path, csv.str());
    }
    written.push_back(path);
  }
  return written;
}

int run_experiment(const Invocation& inv, std::ostream& log) {
  json resolved;
  std::function<Outcome(const RunOptions&)> thunk;
  try {
    json config = inv.config;
    if (!config.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    if (inv.seed) config["seed"] = *inv.seed;
    if (inv.format) config["format"] = *inv.format;
    resolved = resolve_config(config);
    thunk = prepare(resolved);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kBadConfig;
  }

  Outcome outcome;
  try {
    outcome = thunk(RunOptions{inv.threads});
  } catch (const std::exception& e) {
    log << "runtime error in " << resolved["kind"].get<std::string>() << ": " << e.what() << "\n";
    return kRuntimeError;
  }

  try {
    for (const auto& p : write_artifacts(resolved, outcome, inv.out_dir)) log << "wrote " << p.string() << "\n";
  } catch (const std::exception& e) {
    log << "output error: " << e.what() << "\n";
    return kRuntimeError;
  }
  log << resolved["kind"].get<std::string>() << ": " << (outcome.passed ? "PASS" : "FAIL") << "\n";
  return outcome.passed ? kOk : kCertificationFailed;
}

}  // namespace cml::tools

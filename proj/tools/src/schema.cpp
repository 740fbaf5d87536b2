#include "cml_tools/runner.hpp"

#include <map>

namespace cml::tools {
namespace {

enum class Type { integer, number, rational, string, boolean, rational_list, integer_list, number_list, string_list,
                  index_lists, object_list };

struct Field {
  Type type;
  json fallback;
  bool nullable = false;
};

using Schema = std::map<std::string, Field>;

const char* type_name(Type t) {
  switch (t) {
    case Type::integer: return "a nonnegative integer";
    case Type::number: return "a number";
    case Type::rational: return "a rational (number or \"p/q\" string)";
    case Type::string: return "a string";
    case Type::boolean: return "a boolean";
    case Type::rational_list: return "a list of rationals";
    case Type::integer_list: return "a list of nonnegative integers";
    case Type::number_list: return "a list of numbers";
    case Type::string_list: return "a list of strings";
    case Type::index_lists: return "a list of index lists";
    case Type::object_list: return "a list of objects";
  }
  return "?";
}

bool is_count(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); }
bool is_rational(const json& v) { return v.is_number() || v.is_string(); }

template <class Pred>
bool all_of(const json& v, Pred p) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (!p(e)) return false;
  }
  return true;
}

bool matches(Type t, const json& v) {
  switch (t) {
    case Type::integer: return is_count(v);
    case Type::number: return v.is_number();
    case Type::rational: return is_rational(v);
    case Type::string: return v.is_string();
    case Type::boolean: return v.is_boolean();
    case Type::rational_list: return all_of(v, is_rational);
    case Type::integer_list: return all_of(v, is_count);
    case Type::number_list: return all_of(v, [](const json& e) { return e.is_number(); });
    case Type::string_list: return all_of(v, [](const json& e) { return e.is_string(); });
    case Type::index_lists: return all_of(v, [](const json& e) { return all_of(e, is_count); });
    case Type::object_list: return all_of(v, [](const json& e) { return e.is_object(); });
  }
  return false;
}

Schema simulation_fields() {
  return {
      {"topology", {Type::string, "circle"}},
      {"dim", {Type::integer, 1}},
      {"map", {Type::string, "doubling"}},
      {"maps", {Type::string_list, nullptr, true}},
      {"particles", {Type::integer, 2}},
      {"mode", {Type::string, "threshold"}},
      {"epsilon", {Type::rational, "1/100"}},
      {"gamma", {Type::rational, "0"}},
      {"potential", {Type::number_list, nullptr, true}},
      {"adjacency", {Type::index_lists, nullptr, true}},
      {"initial", {Type::rational_list, nullptr, true}},
      {"start", {Type::string, "uniform"}},
      {"horizon", {Type::integer, 100000}},
      {"sync_tolerance", {Type::number, 1e-12}},
      {"arithmetic", {Type::string, "float64"}},
      {"bits", {Type::integer, 10}},
  };
}

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> table = [] {
    std::map<std::string, Schema> t;
    t["simulate"] = simulation_fields();
    auto ens = simulation_fields();
    ens["trials"] = {Type::integer, 100};
    ens["require_sync"] = {Type::boolean, false};
    ens["decay_rate"] = {Type::rational, nullptr, true};
    ens["decay_steps"] = {Type::integer, 50};
    t["ensemble"] = ens;
    t["lemma5"] = {
        {"mode", {Type::string, "distance"}},
        {"a0", {Type::rational, "9/1000"}},
        {"b0", {Type::rational, "1/500"}},
        {"epsilon", {Type::rational, "1/100"}},
        {"steps", {Type::integer, 10000}},
        {"arithmetic", {Type::string, "rational"}},
        {"bits", {Type::integer, 10}},
        {"runs", {Type::integer, 8}},
        {"exact_steps", {Type::integer, 2000}},
        {"check_steps", {Type::integer, 50}},
        {"tolerance", {Type::number, 1e-12}},
    };
    t["shrink"] = {
        {"ns", {Type::integer_list, json::array({3, 4, 5, 6})}},
        {"epsilon", {Type::number, 0.01}},
        {"tolerance", {Type::number, 1e-12}},
    };
    t["ulam"] = {
        {"map", {Type::string, "doubling"}},
        {"bins", {Type::integer, 4}},
        {"density", {Type::number_list, nullptr, true}},
        {"boundary", {Type::string, "zero_extension"}},
    };
    t["ly_check"] = {
        {"map", {Type::string, "tripling"}},
        {"bins", {Type::integer, 243}},
        {"trials", {Type::integer, 1000}},
    };
    t["perturb_check"] = {
        {"intervals", {Type::object_list, json::array({{{"a", "1/4"}, {"b", "1/2"}, {"alpha", "1/2"}}})}},
        {"bins", {Type::integer, 16}},
        {"trials", {Type::integer, 200}},
    };
    t["invariant"] = {
        {"map", {Type::string, "doubling"}},
        {"bins", {Type::integer, 256}},
        {"tol", {Type::number, 1e-10}},
        {"max_iters", {Type::integer, 100000}},
        {"intervals", {Type::object_list, nullptr, true}},
    };
    t["convergence_study"] = {
        {"map", {Type::string, "multiply8"}},
        {"alpha", {Type::rational, "3/4"}},
        {"center", {Type::rational, "1/2"}},
        {"deltas", {Type::rational_list, json::array({"1/10", "1/20", "1/40"})}},
        {"bins", {Type::integer, 3200}},
        {"tol", {Type::number, 1e-10}},
        {"max_iters", {Type::integer, 100000}},
    };
    t["meanfield"] = {
        {"representation", {Type::string, "grid"}},
        {"bins", {Type::integer, 256}},
        {"resolutions", {Type::integer_list, json::array({16})}},
        {"epsilon", {Type::rational, "1/10"}},
        {"gamma", {Type::rational, "1/2"}},
        {"map", {Type::string, "doubling"}},
        {"steps", {Type::integer, 1}},
        {"density", {Type::number_list, nullptr, true}},
        {"atoms", {Type::object_list, nullptr, true}},
        {"expect_invariant", {Type::boolean, true}},
    };
    t["diag_bounds"] = {
        {"bins", {Type::integer, 100}},
        {"particles", {Type::integer, 2}},
        {"epsilon", {Type::rational, "1/10"}},
        {"density", {Type::number_list, nullptr, true}},
        {"boundary", {Type::string, "zero_extension"}},
        {"samples", {Type::integer, 1000000}},
    };
    t["contraction_check"] = {
        {"ns", {Type::integer_list, json::array({2, 3, 4, 5, 6, 7, 8, 9, 10})}},
        {"gammas",
         {Type::rational_list, json::array({"1/10", "1/5", "3/10", "2/5", "1/2", "3/5", "7/10", "4/5", "9/10"})}},
        {"samples", {Type::integer, 2000}},
        {"tolerance", {Type::number, 1e-10}},
        {"growth_gamma", {Type::rational, "1/2"}},
        {"growth_epsilon", {Type::rational, "1/10"}},
        {"growth_theta", {Type::rational, "1"}},
        {"growth_bins", {Type::integer, 16}},
        {"growth_resolution", {Type::integer, 16}},
        {"growth_trials", {Type::integer, 20}},
    };
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate",      "ensemble",  "lemma5",           "shrink",
                                              "ulam",          "ly_check",  "perturb_check",    "invariant",
                                              "convergence_study", "meanfield", "diag_bounds", "contraction_check"};
  return kinds;
}

json default_params(const std::string& kind) {
  auto it = schemas().find(kind);
  if (it == schemas().end()) throw ConfigError("kind", "unknown experiment kind '" + kind + "'");
  json out = json::object();
  for (const auto& [name, field] : it->second) out[name] = field.fallback;
  return out;
}

json resolve_config(const json& config) {
  if (!config.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (const auto& [key, value] : config.items()) {
    if (key != "kind" && key != "params" && key != "seed" && key != "format" && key != "output") {
      throw ConfigError(key, "unknown field");
    }
  }
  if (!config.contains("kind")) throw ConfigError("kind", "missing experiment kind");
  if (!config["kind"].is_string()) throw ConfigError("kind", "must be a string");
  const std::string kind = config["kind"];
  auto it = schemas().find(kind);
  if (it == schemas().end()) throw ConfigError("kind", "unknown experiment kind '" + kind + "'");

  json resolved;
  resolved["kind"] = kind;
  resolved["seed"] = 1;
  resolved["format"] = "csv";
  resolved["output"] = ".";
  if (config.contains("seed")) {
    if (!config["seed"].is_number_unsigned() && !(config["seed"].is_number_integer() && config["seed"] >= 0)) {
      throw ConfigError("seed", "must be an unsigned 64-bit integer");
    }
    resolved["seed"] = config["seed"];
  }
  if (config.contains("format")) {
    if (!config["format"].is_string() || (config["format"] != "csv" && config["format"] != "json")) {
      throw ConfigError("format", "must be \"csv\" or \"json\"");
    }
    resolved["format"] = config["format"];
  }
  if (config.contains("output")) {
    if (!config["output"].is_string()) throw ConfigError("output", "must be a string path");
    resolved["output"] = config["output"];
  }

  json params = default_params(kind);
  if (config.contains("params")) {
    const auto& user = config["params"];
    if (!user.is_object()) throw ConfigError("params", "must be an object");
    for (const auto& [key, value] : user.items()) {
      auto f = it->second.find(key);
      const std::string path = "params." + key;
      if (f == it->second.end()) throw ConfigError(path, "unknown field for kind '" + kind + "'");
      if (value.is_null()) {
        if (!f->second.nullable) throw ConfigError(path, std::string("must be ") + type_name(f->second.type));
      } else if (!matches(f->second.type, value)) {
        throw ConfigError(path, std::string("must be ") + type_name(f->second.type));
      }
      params[key] = value;
    }
  }
  resolved["params"] = params;
  return resolved;
}

}  // namespace cml::tools

#include "cml_tools/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using cml::tools::json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON experiment config (full config or params object)");
  cmd->add_option("--seed", c.seed, "seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--format", c.format, "series format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", c.threads, "worker threads for ensembles");
}

unsigned thread_count(const Common& c) {
  if (c.threads) return *c.threads;
  if (const char* env = std::getenv("CML_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring malformed CML_THREADS='" << env << "'\n";
    }
  }
  return 0;
}

int dispatch(json config, const Common& c) {
  cml::tools::Invocation inv;
  inv.seed = c.seed;
  inv.format = c.format;
  inv.threads = thread_count(c);
  if (c.out) {
    inv.out_dir = *c.out;
  } else if (config.is_object() && config.contains("output") && config["output"].is_string()) {
    inv.out_dir = config["output"].get<std::string>();
  }
  inv.config = std::move(config);
  return cml::tools::run_experiment(inv, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cmlbench: coupled map lattice experiments"};
  app.require_subcommand(1);

  std::map<std::string, Common> commons;
  for (const auto& kind : cml::tools::experiment_kinds()) {
    auto* cmd = app.add_subcommand(kind, "run a " + kind + " experiment");
    add_common(cmd, commons[kind]);
  }
  app.add_subcommand("recipes", "list named recipes");
  Common recipe_common;
  std::string recipe_name;
  auto* recipe = app.add_subcommand("recipe", "run a named recipe");
  recipe->add_option("name", recipe_name, "recipe name")->required();
  add_common(recipe, recipe_common);
  std::string show_name;
  auto* show = app.add_subcommand("show", "print the resolved config of a recipe");
  show->add_option("name", show_name, "recipe name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cml::tools::kBadConfig;
  }

  try {
    if (app.got_subcommand("recipes")) {
      for (const auto& name : cml::tools::recipe_names()) std::cout << name << "\n";
      return 0;
    }
    if (app.got_subcommand("show")) {
      std::cout << cml::tools::resolve_config(cml::tools::recipe_config(show_name)).dump(2) << "\n";
      return 0;
    }
    if (app.got_subcommand("recipe")) {
      json config = cml::tools::recipe_config(recipe_name);
      if (!recipe_common.config_path.empty()) {
        std::cerr << "recipe runs ignore --config\n";
      }
      return dispatch(std::move(config), recipe_common);
    }
    for (const auto& kind : cml::tools::experiment_kinds()) {
      if (!app.got_subcommand(kind)) continue;
      const auto& c = commons[kind];
      json config = json::object();
      if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        if (!in) {
          std::cerr << "config error: cannot open " << c.config_path << "\n";
          return cml::tools::kBadConfig;
        }
        try {
          config = json::parse(in);
        } catch (const json::parse_error& e) {
          std::cerr << "config error: " << c.config_path << ": " << e.what() << "\n";
          return cml::tools::kBadConfig;
        }
        // A bare params object is accepted as shorthand.
        if (config.is_object() && !config.contains("kind") && !config.contains("params")) {
          config = json{{"params", config}};
        }
      }
      if (config.is_object()) {
        if (config.contains("kind") && config["kind"] != kind) {
          std::cerr << "config error: kind: config says " << config["kind"].dump() << " but subcommand is " << kind
                    << "\n";
          return cml::tools::kBadConfig;
        }
        config["kind"] = kind;
      }
      return dispatch(std::move(config), c);
    }
  } catch (const cml::tools::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cml::tools::kBadConfig;
  }
  return cml::tools::kBadConfig;
}

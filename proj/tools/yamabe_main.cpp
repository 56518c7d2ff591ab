#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "yamabe/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"yamabe-lab: radial Yamabe constants, spectral bounds and continuation runs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool quiet = false;

  for (const char* name : {"q", "mu", "continue", "qinf", "audit", "bubble", "models"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "path to the JSON run configuration");
    sub->add_option("--out", out_dir, "output directory (default: . or $YAMABE_OUT_DIR)");
    sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_flag("--quiet", quiet, "suppress progress output");
  }

  CLI11_PARSE(app, argc, argv);
  std::string sub = app.get_subcommands().front()->get_name();

  if (out_dir.empty()) {
    const char* env = std::getenv("YAMABE_OUT_DIR");
    out_dir = env ? env : ".";
  }

  yamabe::RunConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = yamabe::RunConfig::from_file(config_path);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  } else if (sub != "models") {
    std::cerr << "config error: --config is required for '" << sub << "'\n";
    return 2;
  }
  if (seed_set) {
    cfg.seed = seed;
    cfg.minimize.rng_seed = seed;
  }

  return yamabe::run_command(sub, cfg, out_dir, quiet);
}

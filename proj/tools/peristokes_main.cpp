// Batch driver for the peristaltic pump shape toolkit.
//
//   peristokes --mode solve --shape pump.shape --out results/
//   peristokes --config run.cfg --set M=96 --set Q0=0.3
//
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 non-convergence.

#include <CLI11.hpp>

#include "peristokes/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"peristokes - power-optimal peristaltic pump shapes"};

  std::string config_path, mode, out_dir, shape_file;
  unsigned long seed = 0;
  bool seed_set = false;
  std::vector<std::string> overrides;

  app.add_option("--config", config_path, "configuration file (key value lines)");
  app.add_option("--mode", mode, "solve | optimize | check-gradient | sample-field");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--shape", shape_file, "shape file path");
  app.add_option("--seed", seed, "RNG seed for randomized initial shapes")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--set", overrides, "override any config key, key=value")->take_all();

  CLI11_PARSE(app, argc, argv);

  peristokes::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = peristokes::load_config(config_path);
    if (!mode.empty()) cfg.mode = mode;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!shape_file.empty()) cfg.shape_file = shape_file;
    if (seed_set) cfg.seed = seed;
    for (const std::string& kv : overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw peristokes::ConfigError("--set expects key=value, got '" + kv + "'");
      peristokes::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return peristokes::kConfigError;
  }
  return peristokes::run(cfg);
}

// Batch experiment runner for the anisotropic stable JCIR toolkit.
//
// Exit codes: 0 success, 1 configuration/validation error, 2 numerical
// failure (solver breakdown, truncation failure, degenerate fits).

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "ajcir/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"anisotropic stable JCIR process toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_set = false, threads_set = false, out_set = false;

  const std::vector<std::string> experiments = {
      "simulate",  "riccati-check", "density1d", "invariant1d",
      "condition-a", "rates",       "boundary",  "lyapunov",
      "ergodicity", "besov",        "dobrushin"};

  for (const auto& name : experiments) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads, "worker threads (0 = all)")
        ->each([&](const std::string&) { threads_set = true; });
    sub->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { out_set = true; });
  }

  std::string artifact, plot_out;
  auto* plot = app.add_subcommand("plot-data",
                                  "reshape a stored artifact into tidy CSV");
  plot->add_option("artifact", artifact, "artifact JSON header")->required();
  plot->add_option("--out", plot_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      ajcir::emit_plot_data(artifact, plot_out);
      return 0;
    }
    for (const auto& name : experiments) {
      if (app.get_subcommand(name)->parsed()) {
        ajcir::CliOverrides overrides;
        if (seed_set) overrides.seed = seed;
        if (threads_set) overrides.threads = threads;
        if (out_set) overrides.out_dir = out_dir;
        const auto cfg =
            ajcir::load_experiment_config(name, config_path, overrides);
        ajcir::run(cfg);
        std::printf("wrote %s\n", cfg.out_dir.string().c_str());
        return 0;
      }
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}

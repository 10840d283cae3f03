#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>

#include "ajcir/model.hpp"

namespace ajcir {

inline constexpr const char* kToolName = "ajcir";
inline constexpr const char* kToolVersion = "0.1.0";

// Fully resolved run description: model, experiment tag, knobs, seed,
// threads, output directory. The manifest written by run() reproduces it.
struct ExperimentConfig {
  std::string experiment;
  ModelParams model;
  nlohmann::json knobs;  // experiment-specific table (may be empty)
  std::uint64_t seed = 12345;
  int threads = 0;  // 0: all available
  std::filesystem::path out_dir;
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

// Loads a config (or a previously written manifest) and applies flag
// overrides; the experiment name comes from the subcommand.
ExperimentConfig load_experiment_config(const std::string& experiment,
                                        const std::filesystem::path& config_path,
                                        const CliOverrides& overrides);

// Dispatches to the named experiment and writes its artifacts plus a
// manifest and human-readable summary under out_dir. Throws
// std::invalid_argument (usage/validation) or std::runtime_error
// (numerical failure); the CLI maps these to exit codes 1 and 2.
void run(const ExperimentConfig& config);

// Reshapes a stored artifact (by its JSON header) into a tidy long-format
// CSV with columns series,x,y,lo,hi. Throws std::invalid_argument for
// unknown artifact schemas.
void emit_plot_data(const std::filesystem::path& artifact_json,
                    const std::filesystem::path& out_csv);

}  // namespace ajcir

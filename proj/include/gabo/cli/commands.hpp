#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "gabo/cli/config.hpp"
#include "gabo/data/synth.hpp"

namespace gabo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitAborted = 3;

struct TrainOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::optional<train::ExperimentResult> result;
};

/// Loads the dataset, splits it and runs one experiment, writing into
/// config.out_dir: config.json (resolved), metrics.jsonl, summary.json,
/// best_model.{bin,json} and, under gabo, augmenter.{bin,json}.
TrainOutcome run_train(const ExperimentConfig& config);

/// `train` subcommand: --config path with optional --out / --seed overrides.
int cmd_train(const std::filesystem::path& config_path, const std::optional<std::string>& out,
              const std::optional<std::uint64_t>& seed);

/// Runs every (generation, transform, seed) cell, `jobs` at a time, each in
/// out/cells/<generation>_<transform>/seed_<s>; writes out/grid.csv and
/// out/grid.json. Exit 0 when at least one cell succeeded.
int run_grid(const GridSpec& grid, const std::filesystem::path& out, std::size_t jobs);
int cmd_grid(const std::filesystem::path& grid_path, const std::optional<std::string>& out, std::size_t jobs);

struct GridRow {
  std::string generation, transform;
  std::size_t n_seeds = 0;
  double mean = 0.0, std = 0.0;
  bool failed = false;
};

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& values);
void write_grid_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows);

int cmd_split(const std::filesystem::path& data, const std::string& scheme, const data::SplitFractions& fractions,
              std::uint64_t seed, const std::filesystem::path& out);
int cmd_synth(const data::SynthOptions& options, const std::filesystem::path& out);
int cmd_features(const std::filesystem::path& data, const std::filesystem::path& out);
/// Prints one line per check (name, max relative error, tolerance, verdict).
int cmd_gradcheck(std::uint64_t seed, std::ostream& out);

}  // namespace gabo::cli

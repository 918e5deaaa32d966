#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gabo/data/split.hpp"
#include "gabo/train/experiment.hpp"

namespace gabo::cli {

using Json = nlohmann::ordered_json;
using train::ConfigError;

enum class SplitScheme { random, scaffold };

struct ExperimentConfig {
  train::TrainConfig train;
  std::string dataset;  // JSON-Lines path
  SplitScheme split = SplitScheme::random;
  data::SplitFractions fractions = data::kDefaultFractions;
  std::uint64_t split_seed = 0;
  std::string out_dir;

  void validate() const;
};

/// Every field, defaults included, in a fixed order.
Json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and ill-typed values raise
/// ConfigError naming the field.
ExperimentConfig config_from_json(const Json& j);
/// Applies the keys present in `patch` on top of `base`.
ExperimentConfig merge_config(const ExperimentConfig& base, const Json& patch);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

struct CellOverride {
  augment::GenerationType generation;
  augment::TransformType transform;
  Json patch;
};

struct GridSpec {
  ExperimentConfig base;
  std::vector<augment::GenerationType> generations;
  std::vector<augment::TransformType> transforms;
  std::vector<std::uint64_t> seeds;
  std::vector<CellOverride> overrides;

  void validate() const;
  /// Base config with this cell's axes, seed and any matching override.
  ExperimentConfig cell_config(augment::GenerationType g, augment::TransformType t, std::uint64_t seed) const;
};

Json to_json(const GridSpec& grid);
GridSpec grid_from_json(const Json& j);
GridSpec load_grid(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace gabo::cli

#include "gabo/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gabo::cli {

using augment::GenerationType;
using augment::TransformType;

namespace {

std::string_view scheme_name(SplitScheme s) { return s == SplitScheme::random ? "random" : "scaffold"; }

SplitScheme parse_scheme(std::string_view s) {
  if (s == "random") return SplitScheme::random;
  if (s == "scaffold") return SplitScheme::scaffold;
  throw std::invalid_argument("unknown split scheme '" + std::string(s) + "' (random, scaffold)");
}

// Reads `key` from `j` into `out` when present, converting type and parse
// errors into ConfigError for that key.
template <typename T>
void read(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(key, std::string("wrong type (") + it->type_name() + ")");
  }
}

template <typename E, typename Parse>
void read_enum(const Json& j, const char* key, E& out, Parse parse) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_string()) throw ConfigError(key, "expected a string");
  try {
    out = parse(it->template get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

void read_unsigned(const Json& j, const char* key, std::size_t& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
  out = it->get<std::size_t>();
}

void read_double(const Json& j, const char* key, double& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number()) throw ConfigError(key, "expected a number");
  out = it->get<double>();
}

void read_u64(const Json& j, const char* key, std::uint64_t& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
  out = it->get<std::uint64_t>();
}

template <typename T>
void read_unsigned_list(const Json& j, const char* key, std::vector<T>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array()) throw ConfigError(key, "expected an array");
  std::vector<T> values;
  for (const auto& v : *it) {
    if (!v.is_number_unsigned()) throw ConfigError(key, "expected non-negative integers");
    values.push_back(v.get<T>());
  }
  out = std::move(values);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "regime", "generation_type", "transform_type", "dim", "layers", "gin_eps", "train_eps", "latent_dim",
      "generator_hidden", "augmenter_init", "standardize_classic", "batch_size", "eval_batch_size", "epochs",
      "patience", "lr", "momentum", "milestones", "lr_factor", "classifier_l2", "augmenter_l2", "outer_lr",
      "outer_period", "window", "flag_steps", "flag_step_size", "flag_rule", "seed", "record_wall_time", "dataset",
      "split", "fractions", "split_seed", "out_dir"};
  return keys;
}

void apply(const Json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().count(key)) throw ConfigError(key, "unknown key");
  }
  auto& t = c.train;
  read_enum(j, "regime", t.regime, train::parse_regime);
  read_enum(j, "generation_type", t.generation, augment::parse_generation);
  read_enum(j, "transform_type", t.transform, augment::parse_transform);
  read_unsigned(j, "dim", t.dim);
  read_unsigned(j, "layers", t.layers);
  read_double(j, "gin_eps", t.gin_eps);
  read(j, "train_eps", t.train_eps);
  read_unsigned(j, "latent_dim", t.latent_dim);
  read_unsigned(j, "generator_hidden", t.generator_hidden);
  read_enum(j, "augmenter_init", t.augmenter_init, train::parse_augmenter_init);
  read(j, "standardize_classic", t.standardize_classic);
  read_unsigned(j, "batch_size", t.batch_size);
  read_unsigned(j, "eval_batch_size", t.eval_batch_size);
  read_unsigned(j, "epochs", t.epochs);
  read_unsigned(j, "patience", t.patience);
  read_double(j, "lr", t.lr);
  read_double(j, "momentum", t.momentum);
  read_unsigned_list(j, "milestones", t.milestones);
  read_double(j, "lr_factor", t.lr_factor);
  read_double(j, "classifier_l2", t.classifier_l2);
  read_double(j, "augmenter_l2", t.augmenter_l2);
  read_double(j, "outer_lr", t.outer_lr);
  read_unsigned(j, "outer_period", t.outer_period);
  read_unsigned(j, "window", t.window);
  read_unsigned(j, "flag_steps", t.flag_steps);
  read_double(j, "flag_step_size", t.flag_step_size);
  read_enum(j, "flag_rule", t.flag_rule, train::parse_ascent_rule);
  read_u64(j, "seed", t.seed);
  read(j, "record_wall_time", t.record_wall_time);
  read(j, "dataset", c.dataset);
  read_enum(j, "split", c.split, parse_scheme);
  if (auto it = j.find("fractions"); it != j.end()) {
    if (!it->is_array() || it->size() != 4) throw ConfigError("fractions", "expected four numbers");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(*it)[i].is_number()) throw ConfigError("fractions", "expected four numbers");
      c.fractions[i] = (*it)[i].get<double>();
    }
  }
  read_u64(j, "split_seed", c.split_seed);
  read(j, "out_dir", c.out_dir);
}

}  // namespace

void ExperimentConfig::validate() const {
  train.validate();
  if (dataset.empty()) throw ConfigError("dataset", "a dataset path is required");
  if (!std::filesystem::exists(dataset)) throw ConfigError("dataset", "no such file: " + dataset);
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("fractions", "every fraction must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("fractions", "must sum to 1");
}

Json to_json(const ExperimentConfig& c) {
  const auto& t = c.train;
  Json j;
  j["regime"] = train::to_string(t.regime);
  j["generation_type"] = augment::to_string(t.generation);
  j["transform_type"] = augment::to_string(t.transform);
  j["dim"] = t.dim;
  j["layers"] = t.layers;
  j["gin_eps"] = t.gin_eps;
  j["train_eps"] = t.train_eps;
  j["latent_dim"] = t.latent_dim;
  j["generator_hidden"] = t.generator_hidden;
  j["augmenter_init"] = train::to_string(t.augmenter_init);
  j["standardize_classic"] = t.standardize_classic;
  j["batch_size"] = t.batch_size;
  j["eval_batch_size"] = t.eval_batch_size;
  j["epochs"] = t.epochs;
  j["patience"] = t.patience;
  j["lr"] = t.lr;
  j["momentum"] = t.momentum;
  j["milestones"] = t.milestones;
  j["lr_factor"] = t.lr_factor;
  j["classifier_l2"] = t.classifier_l2;
  j["augmenter_l2"] = t.augmenter_l2;
  j["outer_lr"] = t.outer_lr;
  j["outer_period"] = t.outer_period;
  j["window"] = t.window;
  j["flag_steps"] = t.flag_steps;
  j["flag_step_size"] = t.flag_step_size;
  j["flag_rule"] = train::to_string(t.flag_rule);
  j["seed"] = t.seed;
  j["record_wall_time"] = t.record_wall_time;
  j["dataset"] = c.dataset;
  j["split"] = scheme_name(c.split);
  j["fractions"] = c.fractions;
  j["split_seed"] = c.split_seed;
  j["out_dir"] = c.out_dir;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  apply(j, c);
  return c;
}

ExperimentConfig merge_config(const ExperimentConfig& base, const Json& patch) {
  ExperimentConfig c = base;
  apply(patch, c);
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError("config", e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  write_json_file(path, to_json(config));
}

void GridSpec::validate() const {
  if (generations.empty()) throw ConfigError("generation_types", "must not be empty");
  if (transforms.empty()) throw ConfigError("transform_types", "must not be empty");
  if (seeds.empty()) throw ConfigError("seeds", "must not be empty");
}

ExperimentConfig GridSpec::cell_config(GenerationType g, TransformType t, std::uint64_t seed) const {
  ExperimentConfig c = base;
  c.train.generation = g;
  c.train.transform = t;
  c.train.seed = seed;
  for (const auto& o : overrides) {
    if (o.generation == g && o.transform == t) c = merge_config(c, o.patch);
  }
  return c;
}

Json to_json(const GridSpec& grid) {
  Json j;
  j["base"] = to_json(grid.base);
  j["generation_types"] = Json::array();
  for (auto g : grid.generations) j["generation_types"].push_back(augment::to_string(g));
  j["transform_types"] = Json::array();
  for (auto t : grid.transforms) j["transform_types"].push_back(augment::to_string(t));
  j["seeds"] = grid.seeds;
  j["overrides"] = Json::array();
  for (const auto& o : grid.overrides) {
    j["overrides"].push_back(
        {{"generation_type", augment::to_string(o.generation)}, {"transform_type", augment::to_string(o.transform)},
         {"config", o.patch}});
  }
  return j;
}

GridSpec grid_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("grid", "expected a JSON object");
  static const std::set<std::string> keys{"base", "generation_types", "transform_types", "seeds", "overrides"};
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) throw ConfigError(key, "unknown key");
  }
  GridSpec grid;
  if (j.contains("base")) grid.base = config_from_json(j.at("base"));
  auto strings = [&](const char* key) {
    std::vector<std::string> out;
    read(j, key, out);
    return out;
  };
  try {
    for (const auto& s : strings("generation_types")) grid.generations.push_back(augment::parse_generation(s));
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("generation_types", e.what());
  }
  try {
    for (const auto& s : strings("transform_types")) grid.transforms.push_back(augment::parse_transform(s));
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("transform_types", e.what());
  }
  read_unsigned_list(j, "seeds", grid.seeds);
  if (j.contains("overrides")) {
    const auto& arr = j.at("overrides");
    if (!arr.is_array()) throw ConfigError("overrides", "expected an array");
    for (const auto& o : arr) {
      CellOverride cell{GenerationType::gin, TransformType::bias, Json::object()};
      for (const auto& [key, value] : o.items()) {
        if (key != "generation_type" && key != "transform_type" && key != "config") {
          throw ConfigError("overrides." + key, "unknown key");
        }
      }
      read_enum(o, "generation_type", cell.generation, augment::parse_generation);
      read_enum(o, "transform_type", cell.transform, augment::parse_transform);
      if (o.contains("config")) cell.patch = o.at("config");
      merge_config(grid.base, cell.patch);  // surface bad keys now
      grid.overrides.push_back(std::move(cell));
    }
  }
  grid.validate();
  return grid;
}

GridSpec load_grid(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError("grid", e.what());
  }
  return grid_from_json(j);
}

}  // namespace gabo::cli

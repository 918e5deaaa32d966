#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gabo/augment/augmenter.hpp"
#include "gabo/data/split.hpp"
#include "gabo/models/classifier.hpp"
#include "gabo/train/flag.hpp"

namespace gabo::train {

enum class Regime { gabo, flag, noise_baseline, plain };
enum class AugmenterInit { random, identity };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view s);
std::string_view to_string(AugmenterInit a);
AugmenterInit parse_augmenter_init(std::string_view s);

/// Raised by TrainConfig::validate; `field` names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct TrainConfig {
  Regime regime = Regime::gabo;
  augment::GenerationType generation = augment::GenerationType::gin;
  augment::TransformType transform = augment::TransformType::bias;

  std::size_t dim = 256;
  std::size_t layers = 5;
  double gin_eps = 0.0;
  bool train_eps = false;

  std::size_t latent_dim = 10;
  std::size_t generator_hidden = 128;
  AugmenterInit augmenter_init = AugmenterInit::random;
  bool standardize_classic = false;

  std::size_t batch_size = 32;
  std::size_t eval_batch_size = 256;
  std::size_t epochs = 200;
  std::size_t patience = 30;
  double lr = 0.1;
  double momentum = 0.9;
  std::vector<std::size_t> milestones{60, 120, 160};
  double lr_factor = 0.2;
  double classifier_l2 = 5e-4;
  double augmenter_l2 = 0.01;

  double outer_lr = 0.01;
  std::size_t outer_period = 10;  // k
  std::size_t window = 4;         // j

  std::size_t flag_steps = 3;
  double flag_step_size = 1e-3;
  AscentRule flag_rule = AscentRule::sign;

  std::uint64_t seed = 0;
  bool record_wall_time = false;

  void validate() const;
  models::ClassifierConfig classifier_config(const data::Vocab& vocab) const;
  augment::AugmenterConfig augmenter_config() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_auc;
  double lr = 0.0;
  bool lr_drop = false;
  std::optional<double> phi_l2_mean;
  std::optional<double> wall_ms;
};

struct ExperimentResult {
  std::vector<EpochMetrics> epochs;
  std::optional<double> best_val_auc;
  std::optional<std::size_t> best_epoch;
  std::optional<double> test_auc;
  std::size_t stop_epoch = 0;
  bool early_stopped = false;
  models::ParamSet best_omega;
  models::ParamSet theta;
  std::vector<std::string> warnings;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Scores every graph in `indices` without recording.
std::vector<double> predict(const models::Classifier& model, std::span<const Tensor> omega,
                            std::span<const data::MolGraph> graphs, std::span<const std::size_t> indices,
                            std::size_t batch_size);

/// Full training run for one regime: epochs of inner steps (plus outer steps
/// every k inner steps under gabo), validation AUC, early stopping and the
/// lr schedule; the test AUC is that of the best-validation parameters.
ExperimentResult run_experiment(const TrainConfig& config, const data::Dataset& dataset,
                                const data::DatasetSplit& split, const EpochCallback& on_epoch = nullptr);

}  // namespace gabo::train

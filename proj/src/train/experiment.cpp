#include "gabo/train/experiment.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "gabo/common/random.hpp"
#include "gabo/data/batch.hpp"
#include "gabo/features/centrality.hpp"
#include "gabo/train/objectives.hpp"
#include "gabo/train/schedule.hpp"

namespace gabo::train {

using namespace gabo::ad;

namespace {

// RNG stream ids; every regime draws batch orders from the same stream.
enum Stream : std::uint64_t {
  kClassifierInit = 1,
  kAugmenterInit = 2,
  kShuffle = 3,
  kLatent = 4,
  kFlag = 5,
  kBaselineNoise = 6,
};

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

std::optional<double> safe_auc(std::span<const double> scores, std::span<const int> labels, const char* what,
                               std::size_t epoch, std::vector<std::string>& warnings) {
  bool pos = false, neg = false;
  for (int y : labels) (y == 1 ? pos : neg) = true;
  if (!pos || !neg) {
    std::ostringstream msg;
    msg << what << " split has a single class at epoch " << epoch << "; AUC skipped";
    warnings.push_back(msg.str());
    return std::nullopt;
  }
  return models::roc_auc(scores, labels);
}

std::vector<int> labels_of(std::span<const data::MolGraph> graphs, std::span<const std::size_t> idx) {
  std::vector<int> y;
  y.reserve(idx.size());
  for (auto i : idx) y.push_back(graphs[i].label);
  return y;
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::gabo: return "gabo";
    case Regime::flag: return "flag";
    case Regime::noise_baseline: return "noise_baseline";
    case Regime::plain: return "plain";
  }
  return "?";
}

Regime parse_regime(std::string_view s) {
  if (s == "gabo") return Regime::gabo;
  if (s == "flag") return Regime::flag;
  if (s == "noise_baseline") return Regime::noise_baseline;
  if (s == "plain") return Regime::plain;
  throw std::invalid_argument("unknown regime '" + std::string(s) + "' (gabo, flag, noise_baseline, plain)");
}

std::string_view to_string(AugmenterInit a) { return a == AugmenterInit::random ? "random" : "identity"; }

AugmenterInit parse_augmenter_init(std::string_view s) {
  if (s == "random") return AugmenterInit::random;
  if (s == "identity") return AugmenterInit::identity;
  throw std::invalid_argument("unknown augmenter_init '" + std::string(s) + "' (random, identity)");
}

void TrainConfig::validate() const {
  require(dim > 0, "dim", "must be positive");
  require(layers > 0, "layers", "must be positive");
  require(std::isfinite(gin_eps), "gin_eps", "must be finite");
  require(latent_dim > 0, "latent_dim", "must be at least 1");
  require(generator_hidden > 0, "generator_hidden", "must be positive");
  require(batch_size > 0, "batch_size", "must be positive");
  require(eval_batch_size > 0, "eval_batch_size", "must be positive");
  require(epochs > 0, "epochs", "must be positive");
  require(patience > 0, "patience", "must be positive");
  require(lr > 0.0 && std::isfinite(lr), "lr", "must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(lr_factor > 0.0 && std::isfinite(lr_factor), "lr_factor", "must be positive");
  require(classifier_l2 >= 0.0 && std::isfinite(classifier_l2), "classifier_l2", "must be non-negative");
  require(augmenter_l2 >= 0.0 && std::isfinite(augmenter_l2), "augmenter_l2", "must be non-negative");
  require(outer_lr >= 0.0 && std::isfinite(outer_lr), "outer_lr", "must be non-negative");
  require(outer_period > 0, "outer_period", "must be positive");
  require(window > 0, "window", "must be positive");
  require(window <= outer_period, "window", "must not exceed outer_period");
  require(flag_steps > 0, "flag_steps", "must be at least 1");
  require(flag_step_size >= 0.0 && std::isfinite(flag_step_size), "flag_step_size", "must be non-negative");
}

models::ClassifierConfig TrainConfig::classifier_config(const data::Vocab& vocab) const {
  return {vocab.sizes, dim, layers, gin_eps, train_eps};
}

augment::AugmenterConfig TrainConfig::augmenter_config() const {
  return {generation, transform, dim, latent_dim, generator_hidden};
}

std::vector<double> predict(const models::Classifier& model, std::span<const Tensor> omega,
                            std::span<const data::MolGraph> graphs, std::span<const std::size_t> indices,
                            std::size_t batch_size) {
  NoGradGuard no_grad;
  std::vector<double> scores;
  scores.reserve(indices.size());
  for (const auto& part : data::chunk(indices, batch_size)) {
    auto logits = model.forward(omega, data::make_batch(graphs, part));
    for (double z : logits.values()) scores.push_back(z);
  }
  return scores;
}

namespace {

ExperimentResult run_checked(const TrainConfig& config, const data::Dataset& dataset, const data::DatasetSplit& split,
                             const EpochCallback& on_epoch) {
  if (split.train.empty()) throw std::invalid_argument("run_experiment: empty train split");
  if (split.val.empty()) throw std::invalid_argument("run_experiment: empty val split");
  if (split.test.empty()) throw std::invalid_argument("run_experiment: empty test split");
  const bool gabo = config.regime == Regime::gabo;
  if (gabo && split.pseudo_val.empty()) throw std::invalid_argument("run_experiment: gabo needs a pseudo_val split");

  const auto& graphs = dataset.graphs;
  ExperimentResult result;

  std::vector<std::vector<double>> classic_cache;
  const bool classic = gabo && config.generation == augment::GenerationType::classic;
  if (classic) {
    classic_cache = features::classic_features(graphs);
    if (config.standardize_classic) features::standardize(classic_cache);
  }
  const auto* cache = classic ? &classic_cache : nullptr;

  models::Classifier model(config.classifier_config(dataset.vocab));
  Rng init_rng(derive_seed(config.seed, kClassifierInit, 0));
  models::ParamSet omega_set = model.init(init_rng);
  InnerState state = make_inner_state(omega_set.tensors);

  augment::Augmenter augmenter(config.augmenter_config());
  models::ParamSet theta_set;
  if (gabo) {
    Rng aug_rng(derive_seed(config.seed, kAugmenterInit, 0));
    theta_set = config.augmenter_init == AugmenterInit::identity ? augmenter.identity(aug_rng) : augmenter.init(aug_rng);
  }

  std::vector<data::GraphBatch> pval_batches;
  if (gabo) {
    for (const auto& part : data::chunk(split.pseudo_val, config.batch_size)) {
      pval_batches.push_back(data::make_batch(graphs, part));
    }
  }
  std::size_t pval_cursor = 0;

  const auto val_labels = labels_of(graphs, split.val);
  const auto test_labels = labels_of(graphs, split.test);

  Scheduler scheduler(config.lr, config.milestones, config.lr_factor);
  EarlyStopping stopping(config.patience);
  UnrollWindow window(config.window);
  const OuterConfig outer{config.outer_lr, config.augmenter_l2};
  const FlagConfig flag{config.flag_steps, config.flag_step_size, config.flag_rule};
  std::size_t step = 0;
  result.best_omega.names = omega_set.names;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = scheduler.lr(epoch);
    m.lr_drop = scheduler.drops_at(epoch);
    const SgdHyper hyper{m.lr, config.momentum, 2.0 * config.classifier_l2};

    std::vector<std::size_t> order = split.train;
    Rng shuffle_rng(derive_seed(config.seed, kShuffle, epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0, phi_sum = 0.0;
    std::size_t batches = 0, phi_rows = 0;
    for (const auto& part : data::chunk(order, config.batch_size)) {
      auto batch = data::make_batch(graphs, part, cache);
      const auto n = batch.num_nodes;
      InnerStepInfo info;
      switch (config.regime) {
        case Regime::plain:
          info = inner_step(state, {}, plain_inner_loss(model, std::move(batch)), hyper, nullptr, step);
          break;
        case Regime::noise_baseline: {
          Rng rng(derive_seed(config.seed, kBaselineNoise, step));
          auto noise = augment::uniform_noise(n, config.dim, rng);
          info = inner_step(state, {}, noisy_loss(model, std::move(batch), noise), hyper, nullptr, step);
          break;
        }
        case Regime::flag: {
          Rng rng(derive_seed(config.seed, kFlag, step));
          info = flag_train_step(state, {n, config.dim}, perturbed_loss(model, std::move(batch)), flag, hyper, rng,
                                 step);
          break;
        }
        case Regime::gabo: {
          Rng rng(derive_seed(config.seed, kLatent, step));
          auto latent = augmenter.sample_latent(n, rng);
          augment::Phi phi;
          const auto pos = step % config.outer_period;
          const bool record = pos + config.window >= config.outer_period;
          info = inner_step(state, theta_set.tensors, augmented_loss(model, augmenter, std::move(batch), latent, &phi),
                            hyper, record ? &window : nullptr, step);
          phi_sum += augment::phi_row_norm_mean(phi) * static_cast<double>(n);
          phi_rows += n;
          if (pos + 1 == config.outer_period) {
            const auto& pval = pval_batches[pval_cursor++ % pval_batches.size()];
            auto r = outer_step(theta_set.tensors, window, plain_loss(model, pval), outer, step);
            theta_set.tensors = std::move(r.theta);
          }
          break;
        }
      }
      loss_sum += info.loss;
      ++batches;
      ++step;
    }
    m.train_loss = loss_sum / static_cast<double>(batches);
    if (gabo) {
      m.phi_l2_mean = phi_rows ? phi_sum / static_cast<double>(phi_rows) : 0.0;
      if (!std::isfinite(*m.phi_l2_mean)) {
        throw TrainingAborted("epoch " + std::to_string(epoch) + ": non-finite phi norm");
      }
    }

    const auto scores = predict(model, state.omega, graphs, split.val, config.eval_batch_size);
    m.val_auc = safe_auc(scores, val_labels, "val", epoch, result.warnings);
    if (stopping.observe(epoch, m.val_auc)) result.best_omega.tensors = state.omega;
    if (config.record_wall_time) {
      m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
    result.epochs.push_back(m);
    result.stop_epoch = epoch;
    if (on_epoch) on_epoch(m);
    if (stopping.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }

  if (result.best_omega.tensors.empty()) {
    result.warnings.push_back("no epoch produced a validation AUC; reporting the final parameters");
    result.best_omega.tensors = state.omega;
  }
  result.best_val_auc = stopping.best();
  result.best_epoch = stopping.best_epoch();
  const auto test_scores = predict(model, result.best_omega.tensors, graphs, split.test, config.eval_batch_size);
  result.test_auc = safe_auc(test_scores, test_labels, "test", result.stop_epoch, result.warnings);
  result.theta = std::move(theta_set);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const TrainConfig& config, const data::Dataset& dataset,
                                const data::DatasetSplit& split, const EpochCallback& on_epoch) {
  config.validate();
  try {
    return run_checked(config, dataset, split, on_epoch);
  } catch (const std::domain_error& e) {
    throw TrainingAborted(std::string("evaluation: ") + e.what());
  }
}

}  // namespace gabo::train

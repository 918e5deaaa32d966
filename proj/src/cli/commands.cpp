#include "gabo/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "gabo/autodiff/op_checks.hpp"
#include "gabo/cli/log.hpp"
#include "gabo/data/jsonl.hpp"
#include "gabo/features/centrality.hpp"
#include "gabo/models/params.hpp"
#include "gabo/train/hypercheck.hpp"

namespace gabo::cli {

namespace fs = std::filesystem;

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json metrics_line(const train::EpochMetrics& m) {
  Json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss;
  j["val_auc"] = optional_number(m.val_auc);
  j["lr"] = m.lr;
  j["lr_drop"] = m.lr_drop;
  j["phi_l2_mean"] = optional_number(m.phi_l2_mean);
  j["wall_ms"] = optional_number(m.wall_ms);
  return j;
}

Json summary_json(const ExperimentConfig& c, const train::ExperimentResult& r) {
  Json j;
  j["regime"] = train::to_string(c.train.regime);
  j["generation_type"] = augment::to_string(c.train.generation);
  j["transform_type"] = augment::to_string(c.train.transform);
  j["seed"] = c.train.seed;
  j["best_val_auc"] = optional_number(r.best_val_auc);
  j["best_epoch"] = r.best_epoch ? Json(*r.best_epoch) : Json(nullptr);
  j["test_auc"] = optional_number(r.test_auc);
  j["stop_epoch"] = r.stop_epoch;
  j["epochs_run"] = r.epochs.size();
  j["early_stopped"] = r.early_stopped;
  j["warnings"] = r.warnings;
  return j;
}

data::DatasetSplit make_split(const ExperimentConfig& c, const data::Dataset& ds) {
  return c.split == SplitScheme::random ? data::split_random(ds.graphs.size(), c.fractions, c.split_seed)
                                        : data::split_scaffold(ds.graphs, c.fractions, c.split_seed);
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

TrainOutcome run_train(const ExperimentConfig& config) {
  TrainOutcome outcome;
  data::Dataset ds;
  data::DatasetSplit split;
  try {
    config.validate();
    ds = data::load_jsonl(config.dataset);
    split = make_split(config, ds);
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitInvalidConfig;
    outcome.message = e.what();
    return outcome;
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInvalidConfig;
    outcome.message = std::string("dataset: ") + e.what();
    return outcome;
  }
  for (const auto& w : split.warnings) log_info("split: " + w);

  const fs::path out = config.out_dir.empty() ? fs::path(".") : fs::path(config.out_dir);
  fs::create_directories(out);
  save_config(out / "config.json", config);
  std::ofstream metrics(out / "metrics.jsonl");
  try {
    auto result = train::run_experiment(config.train, ds, split, [&](const train::EpochMetrics& m) {
      metrics << metrics_line(m).dump() << '\n';
      std::ostringstream line;
      line << "epoch " << m.epoch << " loss " << m.train_loss << " val_auc "
           << (m.val_auc ? format_double(*m.val_auc) : "null");
      log_debug(line.str());
    });
    metrics.flush();
    write_json_file(out / "summary.json", summary_json(config, result));
    models::save_checkpoint(out / "best_model", result.best_omega);
    if (config.train.regime == train::Regime::gabo) models::save_checkpoint(out / "augmenter", result.theta);
    std::ostringstream line;
    line << train::to_string(config.train.regime) << " seed " << config.train.seed << ": test_auc "
         << (result.test_auc ? format_double(*result.test_auc) : "null") << " after " << result.epochs.size()
         << " epochs";
    log_info(line.str());
    outcome.result = std::move(result);
  } catch (const train::TrainingAborted& e) {
    outcome.exit_code = kExitAborted;
    outcome.message = std::string("training aborted: ") + e.what();
    Json abort;
    abort["aborted"] = true;
    abort["diagnostic"] = e.what();
    write_json_file(out / "summary.json", abort);
  }
  return outcome;
}

int cmd_train(const fs::path& config_path, const std::optional<std::string>& out,
              const std::optional<std::uint64_t>& seed) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    log(LogLevel::info, std::string("invalid config: ") + e.what());
    return kExitInvalidConfig;
  }
  if (out) config.out_dir = *out;
  if (seed) config.train.seed = *seed;
  auto outcome = run_train(config);
  if (outcome.exit_code != kExitOk) log_info(outcome.message);
  return outcome.exit_code;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_std: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

void write_grid_csv(const fs::path& path, const std::vector<GridRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "generation,transform,n_seeds,mean,std,status\n";
  for (const auto& r : rows) {
    out << r.generation << ',' << r.transform << ',' << r.n_seeds << ',';
    if (r.failed) {
      out << ",,FAILED\n";
    } else {
      out << format_double(r.mean) << ',' << format_double(r.std) << ",ok\n";
    }
  }
}

int run_grid(const GridSpec& grid, const fs::path& out, std::size_t jobs) {
  grid.validate();
  struct Task {
    std::size_t cell;
    ExperimentConfig config;
    std::optional<double> test_auc;
    std::string error;
  };
  std::vector<GridRow> rows;
  std::vector<Task> tasks;
  for (auto g : grid.generations) {
    for (auto t : grid.transforms) {
      const auto cell = rows.size();
      rows.push_back({std::string(augment::to_string(g)), std::string(augment::to_string(t))});
      for (auto seed : grid.seeds) {
        auto c = grid.cell_config(g, t, seed);
        c.out_dir = (out / "cells" / (rows.back().generation + "_" + rows.back().transform) /
                     ("seed_" + std::to_string(seed)))
                        .string();
        tasks.push_back({cell, std::move(c), std::nullopt, {}});
      }
    }
  }
  fs::create_directories(out);
  write_json_file(out / "grid.json", to_json(grid));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) {
      auto& task = tasks[i];
      try {
        auto outcome = run_train(task.config);
        if (outcome.exit_code == kExitOk && outcome.result && outcome.result->test_auc) {
          task.test_auc = outcome.result->test_auc;
        } else {
          task.error = outcome.message.empty() ? "no test AUC" : outcome.message;
        }
      } catch (const std::exception& e) {
        task.error = e.what();
      }
      if (!task.error.empty()) log_info("cell " + task.config.out_dir + " failed: " + task.error);
    }
  };
  const auto n_threads = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<std::vector<double>> values(rows.size());
  std::vector<bool> failed(rows.size(), false);
  for (const auto& task : tasks) {
    if (task.test_auc) {
      values[task.cell].push_back(*task.test_auc);
    } else {
      failed[task.cell] = true;
    }
  }
  bool any_ok = false;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    rows[c].n_seeds = values[c].size();
    rows[c].failed = failed[c];
    if (!failed[c]) {
      std::tie(rows[c].mean, rows[c].std) = mean_std(values[c]);
      any_ok = true;
    }
  }
  write_grid_csv(out / "grid.csv", rows);
  return any_ok ? kExitOk : kExitFailure;
}

int cmd_grid(const fs::path& grid_path, const std::optional<std::string>& out, std::size_t jobs) {
  GridSpec grid;
  try {
    grid = load_grid(grid_path);
  } catch (const ConfigError& e) {
    log_info(std::string("invalid grid: ") + e.what());
    return kExitInvalidConfig;
  }
  const fs::path dir = out ? fs::path(*out) : fs::path(grid.base.out_dir.empty() ? "." : grid.base.out_dir);
  return run_grid(grid, dir, jobs);
}

int cmd_split(const fs::path& data_path, const std::string& scheme, const data::SplitFractions& fractions,
              std::uint64_t seed, const fs::path& out) {
  const auto ds = data::load_jsonl(data_path);
  data::DatasetSplit split;
  if (scheme == "random") {
    split = data::split_random(ds.graphs.size(), fractions, seed);
  } else if (scheme == "scaffold") {
    split = data::split_scaffold(ds.graphs, fractions, seed);
  } else {
    throw std::invalid_argument("unknown split scheme '" + scheme + "' (random, scaffold)");
  }
  Json j;
  const auto parts = split.parts();
  for (std::size_t k = 0; k < parts.size(); ++k) j[data::kSplitNames[k]] = *parts[k];
  j["warnings"] = split.warnings;
  for (const auto& w : split.warnings) log_info("split: " + w);
  write_json_file(out, j);
  return kExitOk;
}

int cmd_synth(const data::SynthOptions& options, const fs::path& out) {
  data::save_jsonl(out, data::synth_motif_dataset(options));
  return kExitOk;
}

int cmd_features(const fs::path& data_path, const fs::path& out_path) {
  const auto ds = data::load_jsonl(data_path);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path.string());
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    const auto& g = ds.graphs[i];
    Json j;
    j["graph"] = i;
    j["betweenness"] = features::betweenness(g);
    j["closeness"] = features::closeness(g);
    j["degree"] = features::degree(g);
    j["pagerank"] = features::pagerank(g);
    out << j.dump() << '\n';
  }
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  auto line = [&](const std::string& name, double error, double tol) {
    const bool pass = error <= tol;
    ok = ok && pass;
    out << std::left << std::setw(28) << name << " max_rel_error " << std::scientific << std::setprecision(3)
        << error << " tol " << tol << (pass ? " PASS" : " FAIL") << '\n';
  };
  for (const auto& r : ad::check_all_ops(20, seed)) {
    line("op " + r.op + " (first)", r.max_first_order_error, 1e-4);
    line("op " + r.op + " (second)", r.max_second_order_error, 1e-4);
  }
  for (const auto& c : train::hypergradient_suite(seed)) {
    line("hypergradient " + c.name + " j=" + std::to_string(c.window), c.error, c.tolerance);
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace gabo::cli

#include <CLI11.hpp>
#include <iostream>

#include "gabo/cli/commands.hpp"
#include "gabo/cli/log.hpp"

using namespace gabo;

int main(int argc, char** argv) {
  try {
    cli::set_log_level(cli::log_level_from_env());
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return cli::kExitInvalidConfig;
  }

  CLI::App app{"Graph augmentation with bilevel optimisation"};
  app.require_subcommand(1);

  std::string config_path, out, data_path, scheme = "random";
  std::optional<std::string> out_opt;
  std::optional<std::uint64_t> seed_opt;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::vector<double> fractions(data::kDefaultFractions.begin(), data::kDefaultFractions.end());
  data::SynthOptions synth;

  auto* train = app.add_subcommand("train", "Run one experiment");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--out", out_opt, "Output directory (overrides out_dir)");
  train->add_option("--seed", seed_opt, "Seed (overrides seed)");

  auto* grid = app.add_subcommand("grid", "Run a generation x transform x seed grid");
  grid->add_option("--config", config_path, "Grid spec (JSON)")->required();
  grid->add_option("--out", out_opt, "Output directory");
  grid->add_option("--jobs", jobs, "Concurrent cells")->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Partition a dataset into train/pseudo_val/val/test");
  split->add_option("--data", data_path, "Dataset (JSON-Lines)")->required();
  split->add_option("--scheme", scheme, "random or scaffold")->check(CLI::IsMember({"random", "scaffold"}));
  split->add_option("--fractions", fractions, "Four fractions")->expected(4);
  split->add_option("--seed", seed, "Seed");
  split->add_option("--out", out, "Output JSON")->required();

  auto* synthc = app.add_subcommand("synth", "Generate a synthetic motif dataset");
  synthc->add_option("--out", out, "Output JSON-Lines")->required();
  synthc->add_option("--n", synth.n_graphs, "Number of graphs");
  synthc->add_option("--seed", synth.seed, "Seed");
  synthc->add_option("--noise", synth.noise_rate, "Label noise rate");
  synthc->add_option("--min-nodes", synth.min_nodes, "Minimum nodes per graph");
  synthc->add_option("--max-nodes", synth.max_nodes, "Maximum nodes per graph");

  auto* features = app.add_subcommand("features", "Dump per-node centrality features");
  features->add_option("--data", data_path, "Dataset (JSON-Lines)")->required();
  features->add_option("--out", out, "Output JSON-Lines")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Run the gradient and hypergradient checks");
  gradcheck->add_option("--seed", seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cli::cmd_train(config_path, out_opt, seed_opt);
    if (*grid) return cli::cmd_grid(config_path, out_opt, jobs);
    if (*split) {
      data::SplitFractions f{};
      std::copy(fractions.begin(), fractions.end(), f.begin());
      return cli::cmd_split(data_path, scheme, f, seed, out);
    }
    if (*synthc) return cli::cmd_synth(synth, out);
    if (*features) return cli::cmd_features(data_path, out);
    if (*gradcheck) return cli::cmd_gradcheck(seed, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitFailure;
  }
  return cli::kExitFailure;
}

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gabo/autodiff/ops.hpp"
#include "gabo/data/split.hpp"
#include "gabo/data/synth.hpp"
#include "gabo/train/experiment.hpp"
#include "gabo/train/hypercheck.hpp"
#include "gabo/train/objectives.hpp"
#include "gabo/train/schedule.hpp"
#include "oracles.hpp"

using namespace gabo;
using namespace gabo::ad;
using namespace gabo::train;

namespace {

data::Dataset toy_dataset(std::size_t n, std::uint64_t seed, double noise = 0.0) {
  data::SynthOptions opt;
  opt.n_graphs = n;
  opt.seed = seed;
  opt.noise_rate = noise;
  return data::synth_motif_dataset(opt);
}

models::ClassifierConfig tiny_classifier(std::size_t dim = 8) {
  return {std::vector<int>(data::kDefaultVocabSizes), dim, 2, 0.0, false};
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TrainConfig small_run(Regime regime) {
  TrainConfig c;
  c.regime = regime;
  c.dim = 8;
  c.layers = 2;
  c.latent_dim = 3;
  c.generator_hidden = 8;
  c.batch_size = 8;
  c.epochs = 4;
  c.patience = 30;
  c.milestones = {2};
  c.outer_period = 3;
  c.window = 2;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("lr schedule") {
  Scheduler s(0.1, {60, 120, 160}, 0.2);
  CHECK(s.lr(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.lr(59) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.lr(60) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(s.lr(120) == doctest::Approx(0.004).epsilon(1e-14));
  CHECK(s.lr(160) == doctest::Approx(0.0008).epsilon(1e-14));
  CHECK(s.lr(199) == doctest::Approx(0.0008).epsilon(1e-14));
  CHECK(s.drops_at(60));
  CHECK_FALSE(s.drops_at(61));
}

TEST_CASE("early stopping") {
  SUBCASE("strict improvement never stops") {
    EarlyStopping es(30);
    for (std::size_t e = 0; e < 200; ++e) {
      CHECK(es.observe(e, 0.5 + 1e-3 * static_cast<double>(e)));
      CHECK_FALSE(es.should_stop());
    }
  }
  SUBCASE("stops after patience stagnant epochs") {
    EarlyStopping es(3);
    es.observe(0, 0.7);
    es.observe(1, 0.7);
    es.observe(2, std::nullopt);  // skipped
    es.observe(3, 0.6);
    CHECK_FALSE(es.should_stop());
    es.observe(4, 0.69);
    CHECK(es.should_stop());
    CHECK(*es.best_epoch() == 0);
  }
}

TEST_CASE("quadratic toy hypergradient") {
  CHECK(std::abs(quadratic_toy_hypergradient() - 0.32) < 1e-10);
  CHECK(std::abs(quadratic_toy_fd() - quadratic_toy_hypergradient()) < 1e-6);
}

TEST_CASE("zero outer lr keeps theta exactly") {
  InnerState state = make_inner_state({Tensor::scalar(1.0)});
  std::vector<Tensor> theta{Tensor::scalar(0.3)};
  UnrollWindow window(1);
  InnerLossFn loss = [](std::span<const Tensor> w, std::span<const Tensor> t) {
    auto r = sub(w[0], t[0]);
    return mul(r, r);
  };
  inner_step(state, theta, loss, {0.1, 0.0, 0.0}, &window);
  auto r = outer_step(theta, window, [](std::span<const Tensor> w) { return mul(w[0], w[0]); }, {0.0, 0.01});
  CHECK(r.theta[0].item() == 0.3);
  CHECK(window.empty());
}

TEST_CASE("hypergradient matches replayed finite differences") {
  for (std::size_t j : {1, 2, 4}) {
    CAPTURE(j);
    auto lg = check_logistic(j, 3);
    CHECK(lg.error < 1e-3);
    auto gnn = check_gnn(j, 3);
    CHECK(gnn.error < 1e-3);
  }
}

TEST_CASE("unroll window bookkeeping") {
  InnerState state = make_inner_state({Tensor::vector({1.0, 2.0})});
  std::vector<Tensor> theta{Tensor::vector({0.0, 0.0})};
  InnerLossFn loss = [](std::span<const Tensor> w, std::span<const Tensor> t) { return squared_norm(std::vector{sub(w[0], t[0])}); };
  UnrollWindow window(4);
  for (int i = 0; i < 3; ++i) inner_step(state, theta, loss, {0.1, 0.9, 0.0}, &window);
  CHECK(window.size() == 3);
  for (int i = 0; i < 3; ++i) inner_step(state, theta, loss, {0.1, 0.9, 0.0}, &window);
  CHECK(window.size() == 4);
  CHECK(window.back().omega_out[0].to_vector() == state.omega[0].to_vector());
  CHECK_THROWS_AS(outer_step(theta, *std::make_unique<UnrollWindow>(2), [](std::span<const Tensor> w) { return sum(w[0]); },
                             {}),
                  std::logic_error);
}

TEST_CASE("inner_step leaves theta and outer_step leaves omega untouched") {
  auto ds = toy_dataset(4, 5);
  auto batch = data::make_batch(ds.graphs, iota_n(4));
  models::Classifier model(tiny_classifier(4));
  augment::Augmenter aug({augment::GenerationType::gin, augment::TransformType::shifted, 4, 3, 8});
  Rng rng(1);
  InnerState state = make_inner_state(model.init(rng).tensors);
  auto theta = aug.init(rng).tensors;
  std::vector<std::vector<double>> theta_before;
  for (const auto& t : theta) theta_before.push_back(t.to_vector());
  UnrollWindow window(2);
  for (int i = 0; i < 2; ++i) {
    inner_step(state, theta, augmented_loss(model, aug, batch, aug.sample_latent(batch.num_nodes, rng)),
               {0.1, 0.9, 1e-3}, &window);
  }
  for (std::size_t k = 0; k < theta.size(); ++k) CHECK(theta[k].to_vector() == theta_before[k]);
  std::vector<std::vector<double>> omega_before;
  for (const auto& w : state.omega) omega_before.push_back(w.to_vector());
  auto r = outer_step(theta, window, plain_loss(model, batch), {0.01, 0.01});
  for (std::size_t k = 0; k < state.omega.size(); ++k) CHECK(state.omega[k].to_vector() == omega_before[k]);
  CHECK(relative_norm_error(r.theta, theta) > 0.0);
}

TEST_CASE("identity augmenter step equals a plain step") {
  auto ds = toy_dataset(6, 6);
  auto batch = data::make_batch(ds.graphs, iota_n(6));
  models::Classifier model(tiny_classifier(6));
  Rng rng(2);
  auto omega = model.init(rng).tensors;
  for (auto t : {augment::TransformType::bias, augment::TransformType::elementwise, augment::TransformType::shifted}) {
    augment::Augmenter aug({augment::GenerationType::noise, t, 6, 3, 8});
    auto theta = aug.identity(rng).tensors;
    InnerState a = make_inner_state(omega), b = make_inner_state(omega);
    UnrollWindow window(1);
    inner_step(a, theta, augmented_loss(model, aug, batch, aug.sample_latent(batch.num_nodes, rng)),
               {0.1, 0.9, 0.0}, &window);
    inner_step(b, {}, plain_inner_loss(model, batch), {0.1, 0.9, 0.0}, nullptr);
    CHECK(relative_norm_error(a.omega, b.omega) < 1e-12);
  }
}

TEST_CASE("inner steps reduce loss on a separable toy set") {
  // Label carried by every node's atom code: separable after mean pooling.
  Rng rng(3);
  std::vector<data::MolGraph> graphs;
  for (int i = 0; i < 20; ++i) {
    const auto n = static_cast<std::uint32_t>(rng.range(4, 9));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t v = 1; v < n; ++v) edges.emplace_back(static_cast<std::uint32_t>(rng.index(v)), v);
    auto g = testing::make_graph(n, edges, i % 2);
    for (std::uint32_t v = 0; v < n; ++v) g.node_feats[v * 9] = i % 2 ? 8 : 7;
    graphs.push_back(g);
  }
  auto batch = data::make_batch(graphs, iota_n(20));
  models::Classifier model(tiny_classifier(16));
  InnerState state = make_inner_state(model.init(rng).tensors);
  auto loss = plain_inner_loss(model, batch);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto info = inner_step(state, {}, loss, {0.01, 0.9, 0.0}, nullptr);
    if (i == 0) first = info.loss;
  }
  {
    NoGradGuard g;
    last = loss(state.omega, {}).item();
  }
  CHECK(last < 0.5 * first);
}

TEST_CASE("non-finite training aborts with a diagnostic") {
  InnerState state = make_inner_state({Tensor::scalar(1.0)});
  InnerLossFn loss = [](std::span<const Tensor> w, std::span<const Tensor>) {
    auto c = mul(w[0], w[0]);
    return mul(mul(c, c), mul(c, c));
  };
  try {
    for (int i = 0; i < 20; ++i) inner_step(state, {}, loss, {1e3, 0.0, 0.0}, nullptr, static_cast<std::size_t>(i));
    FAIL("expected TrainingAborted");
  } catch (const TrainingAborted& e) {
    CHECK(std::string(e.what()).find("inner step") != std::string::npos);
  }
}

TEST_CASE("flag sign ascent example") {
  auto d1 = ascend(Tensor::vector({0.0, 0.0}), Tensor::vector({2.0, -3.0}), 0.01, AscentRule::sign);
  CHECK(d1.to_vector() == std::vector<double>{0.01, -0.01});
  auto n1 = ascend(Tensor::from_rows({{0.0, 0.0}, {0.0, 0.0}}), Tensor::from_rows({{3.0, -4.0}, {0.0, 0.0}}), 0.5,
                   AscentRule::normalized);
  const std::vector<double> expected{0.3, -0.4, 0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) CHECK(n1[i] == doctest::Approx(expected[i]).epsilon(1e-15));
}

TEST_CASE("flag with one round and zero step equals plain training") {
  auto ds = toy_dataset(6, 8);
  auto batch = data::make_batch(ds.graphs, iota_n(6));
  models::Classifier model(tiny_classifier(6));
  Rng rng(4);
  auto omega = model.init(rng).tensors;
  InnerState a = make_inner_state(omega), b = make_inner_state(omega);
  flag_train_step(a, {batch.num_nodes, 6}, perturbed_loss(model, batch), {1, 0.0, AscentRule::sign},
                  {0.1, 0.9, 1e-3}, rng);
  inner_step(b, {}, plain_inner_loss(model, batch), {0.1, 0.9, 1e-3}, nullptr);
  for (std::size_t k = 0; k < omega.size(); ++k) CHECK(a.omega[k].to_vector() == b.omega[k].to_vector());
}

TEST_CASE("flag ascent raises the loss with frozen weights") {
  auto ds = toy_dataset(64, 9, 0.1);
  models::Classifier model(tiny_classifier(8));
  Rng rng(5);
  auto omega = model.init(rng).tensors;
  int raised = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> idx;
    for (int i = 0; i < 8; ++i) idx.push_back(rng.index(ds.graphs.size()));
    auto batch = data::make_batch(ds.graphs, idx);
    auto loss = perturbed_loss(model, batch);
    auto delta0 = flag_initial_delta({batch.num_nodes, 8}, 1e-3, rng);
    auto trace = flag_rounds(omega, delta0, loss, {3, 1e-3, AscentRule::sign});
    NoGradGuard g;
    if (loss(omega, trace.delta_final).item() >= loss(omega, delta0).item()) ++raised;
  }
  CHECK(raised >= trials * 95 / 100);
}

TEST_CASE("run_experiment contracts") {
  auto ds = toy_dataset(80, 11, 0.1);
  auto split = data::split_random(ds.graphs.size(), data::kDefaultFractions, 3);
  SUBCASE("deterministic metric series") {
    for (auto regime : {Regime::gabo, Regime::flag, Regime::noise_baseline, Regime::plain}) {
      auto cfg = small_run(regime);
      auto a = run_experiment(cfg, ds, split);
      auto b = run_experiment(cfg, ds, split);
      CAPTURE(to_string(regime));
      REQUIRE(a.epochs.size() == b.epochs.size());
      for (std::size_t e = 0; e < a.epochs.size(); ++e) {
        CHECK(a.epochs[e].train_loss == b.epochs[e].train_loss);
        CHECK(a.epochs[e].val_auc == b.epochs[e].val_auc);
        CHECK_FALSE(a.epochs[e].wall_ms.has_value());
      }
      CHECK(a.test_auc == b.test_auc);
      CHECK(a.epochs[2].lr_drop);
      CHECK(a.epochs[2].lr == doctest::Approx(0.02));
      CHECK(a.epochs[0].phi_l2_mean.has_value() == (regime == Regime::gabo));
    }
  }
  SUBCASE("identity gabo with frozen theta matches plain") {
    for (auto t : {augment::TransformType::bias, augment::TransformType::elementwise, augment::TransformType::shifted}) {
      auto cfg = small_run(Regime::gabo);
      cfg.transform = t;
      cfg.augmenter_init = AugmenterInit::identity;
      cfg.outer_lr = 0.0;
      auto g = run_experiment(cfg, ds, split);
      auto p = run_experiment(small_run(Regime::plain), ds, split);
      REQUIRE(g.epochs.size() == p.epochs.size());
      for (std::size_t e = 0; e < g.epochs.size(); ++e) {
        REQUIRE(g.epochs[e].val_auc.has_value());
        CHECK(std::abs(*g.epochs[e].val_auc - *p.epochs[e].val_auc) < 1e-9);
      }
    }
  }
  SUBCASE("flag with M=1 and alpha=0 matches plain") {
    auto cfg = small_run(Regime::flag);
    cfg.flag_steps = 1;
    cfg.flag_step_size = 0.0;
    auto f = run_experiment(cfg, ds, split);
    auto p = run_experiment(small_run(Regime::plain), ds, split);
    for (std::size_t e = 0; e < f.epochs.size(); ++e) {
      CHECK(f.epochs[e].val_auc == p.epochs[e].val_auc);
      CHECK(f.epochs[e].train_loss == p.epochs[e].train_loss);
    }
  }
  SUBCASE("invalid config names the field") {
    auto cfg = small_run(Regime::gabo);
    cfg.window = 5;
    try {
      run_experiment(cfg, ds, split);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "window");
    }
  }
}
